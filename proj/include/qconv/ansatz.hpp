#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "qconv/simcore.hpp"

namespace qconv {

/// Kernel window: rows x cols pixels over `channels` colour planes.
struct KernelShape {
    std::size_t rows;
    std::size_t cols;
    std::size_t channels;

    [[nodiscard]] std::size_t pixels() const noexcept { return rows * cols; }
    [[nodiscard]] std::size_t qubits() const noexcept { return rows * cols * channels; }

    friend bool operator==(const KernelShape &, const KernelShape &) = default;
};

void validate(const KernelShape &shape);

enum class AnsatzKind { HQconv, FQconv };

std::string_view to_string(AnsatzKind kind);
AnsatzKind parse_ansatz_kind(std::string_view name);

struct AnsatzConfig {
    AnsatzKind kind = AnsatzKind::FQconv;
    KernelShape shape{2, 2, 3};
    std::size_t circuit_stride = 1;
    /// Empty means "all qubits".
    std::vector<std::size_t> observable_subset;
};

/// Qubit of 1-based pixel ordinal `pixel` in 1-based channel `channel`.
std::size_t layout_qubit_index(const KernelShape &shape, std::size_t pixel, std::size_t channel);

/// Per-channel chains at distance `stride`, then links between pixel 1 of
/// adjacent channels.
CircuitSpec build_hqconv(const KernelShape &shape, std::size_t stride);

/// One flat chain at distance `stride` across all channels.
CircuitSpec build_fqconv(const KernelShape &shape, std::size_t stride);

/// Builds either ansatz and applies the configured observable subset.
CircuitSpec build_ansatz(const AnsatzConfig &config);

/// Maps a window stored row-major with interleaved channels (H x W x C, the
/// image layout) to Rx angles in qubit order: angle = pixel * pi.
std::vector<double> encode_window(std::span<const double> window_pixels, const KernelShape &shape);

} // namespace qconv
