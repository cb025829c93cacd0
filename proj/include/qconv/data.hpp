#pragma once
/**
 * @file
 * Dataset readers and writers (IDX, CIFAR-10 binary batches), area
 * downscaling and seeded subsampling.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qconv/tensor.hpp"

namespace qconv {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarSide * kCifarSide;

/// Images are H x W x C with values in [0, 1]; labels are class indices.
struct LabeledImageSet {
    std::vector<Tensor> images;
    std::vector<std::size_t> labels;
    std::string source;

    [[nodiscard]] std::size_t size() const noexcept { return images.size(); }
    [[nodiscard]] std::vector<std::size_t> image_dims() const;
};

/// Checks pairing, common dims, value range and labels < `classes`.
void validate(const LabeledImageSet &set, std::size_t classes = 10);

LabeledImageSet load_idx(const std::filesystem::path &images_path, const std::filesystem::path &labels_path);

/// Concatenates every record of one batch file.
LabeledImageSet load_cifar_batch(const std::filesystem::path &path);

/// Loads several batch files in order into one set.
LabeledImageSet load_cifar_batches(const std::vector<std::filesystem::path> &paths);

/// Writers for the same formats. Pixels are stored as round(value * 255).
void save_idx(const LabeledImageSet &set, const std::filesystem::path &images_path,
              const std::filesystem::path &labels_path);
void save_cifar_batch(const LabeledImageSet &set, const std::filesystem::path &path);

/// Area (box) averaging with fractional source rectangles. Downscaling only.
Tensor resize_area(const Tensor &image, std::size_t rows, std::size_t cols);
LabeledImageSet resize_area(const LabeledImageSet &set, std::size_t rows, std::size_t cols);

/// `n` pairs drawn without replacement, in draw order.
LabeledImageSet sample_subset(const LabeledImageSet &set, std::size_t n, std::uint64_t seed);

/// Seeded Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

} // namespace qconv
