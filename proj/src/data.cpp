#include "qconv/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qconv/error.hpp"
#include "qconv/io.hpp"
#include "qconv/noise.hpp"

namespace qconv {

namespace {

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", v);
    return buf;
}

std::string at_offset(const std::filesystem::path &path, std::size_t offset) {
    return path.string() + " at byte offset " + std::to_string(offset);
}

std::uint32_t read_be32(const std::vector<std::uint8_t> &bytes, std::size_t offset) {
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::string &out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xFF));
    }
}

/// Reads a big-endian IDX header of `fields` u32 words after the magic.
std::vector<std::uint32_t> idx_header(const std::vector<std::uint8_t> &bytes, const std::filesystem::path &path,
                                      std::uint32_t magic, std::size_t fields) {
    const std::size_t need = 4 * (fields + 1);
    if (bytes.size() < need) {
        fail(ErrorKind::Format, "truncated IDX header in " + at_offset(path, bytes.size()) + " (need " +
                                    std::to_string(need) + " bytes)");
    }
    const std::uint32_t got = read_be32(bytes, 0);
    if (got != magic) {
        fail(ErrorKind::Format, "bad IDX magic in " + at_offset(path, 0) + ": expected " + hex32(magic) + ", got " +
                                    hex32(got));
    }
    std::vector<std::uint32_t> out;
    for (std::size_t f = 0; f < fields; ++f) {
        out.push_back(read_be32(bytes, 4 * (f + 1)));
    }
    return out;
}

void check_payload(const std::vector<std::uint8_t> &bytes, const std::filesystem::path &path, std::size_t header,
                   std::uint64_t payload) {
    const std::uint64_t expected = header + payload;
    if (bytes.size() < expected) {
        fail(ErrorKind::Format, "truncated data in " + at_offset(path, bytes.size()) + " (header promises " +
                                    std::to_string(expected) + " bytes)");
    }
    if (bytes.size() > expected) {
        fail(ErrorKind::Format, "trailing bytes in " + at_offset(path, expected));
    }
}

double to_unit(std::uint8_t v) { return static_cast<double>(v) / 255.0; }

std::uint8_t to_byte(double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorKind::Normalization, "pixel value outside [0, 1]");
    }
    return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

std::size_t checked_label(std::size_t label, const std::filesystem::path &path, std::size_t offset) {
    if (label > 9) {
        fail(ErrorKind::Label, "label " + std::to_string(label) + " outside 0..9 in " + at_offset(path, offset));
    }
    return label;
}

} // namespace

std::vector<std::size_t> LabeledImageSet::image_dims() const {
    return images.empty() ? std::vector<std::size_t>{} : images.front().dims;
}

void validate(const LabeledImageSet &set, std::size_t classes) {
    if (set.images.size() != set.labels.size()) {
        fail(ErrorKind::Consistency, std::to_string(set.images.size()) + " images but " +
                                         std::to_string(set.labels.size()) + " labels");
    }
    const auto dims = set.image_dims();
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.images[i].dims != dims || dims.size() != 3) {
            fail(ErrorKind::Shape, "image " + std::to_string(i) + " has dims " + shape_string(set.images[i].dims));
        }
        for (double v : set.images[i].values) {
            if (!(v >= 0.0 && v <= 1.0)) {
                fail(ErrorKind::Normalization, "image " + std::to_string(i) + " has a value outside [0, 1]");
            }
        }
        if (set.labels[i] >= classes) {
            fail(ErrorKind::Label, "sample " + std::to_string(i) + " has label " + std::to_string(set.labels[i]) +
                                       ", expected < " + std::to_string(classes));
        }
    }
}

LabeledImageSet load_idx(const std::filesystem::path &images_path, const std::filesystem::path &labels_path) {
    const auto image_bytes = read_file_bytes(images_path);
    const auto head = idx_header(image_bytes, images_path, kIdxImageMagic, 3);
    const std::size_t count = head[0];
    const std::size_t rows = head[1];
    const std::size_t cols = head[2];
    check_payload(image_bytes, images_path, 16, std::uint64_t{count} * rows * cols);

    const auto label_bytes = read_file_bytes(labels_path);
    const auto lhead = idx_header(label_bytes, labels_path, kIdxLabelMagic, 1);
    if (lhead[0] != count) {
        fail(ErrorKind::Consistency, images_path.string() + " holds " + std::to_string(count) + " images but " +
                                         labels_path.string() + " holds " + std::to_string(lhead[0]) + " labels");
    }
    check_payload(label_bytes, labels_path, 8, count);

    LabeledImageSet set;
    set.source = "idx:" + images_path.filename().string();
    set.images.reserve(count);
    set.labels.reserve(count);
    const std::size_t pixels = rows * cols;
    for (std::size_t n = 0; n < count; ++n) {
        Tensor img({rows, cols, 1});
        const std::size_t base = 16 + n * pixels;
        for (std::size_t k = 0; k < pixels; ++k) {
            img.values[k] = to_unit(image_bytes[base + k]);
        }
        set.images.push_back(std::move(img));
        set.labels.push_back(checked_label(label_bytes[8 + n], labels_path, 8 + n));
    }
    return set;
}

LabeledImageSet load_cifar_batch(const std::filesystem::path &path) {
    const auto bytes = read_file_bytes(path);
    if (bytes.empty()) {
        fail(ErrorKind::Format, "empty CIFAR batch " + at_offset(path, 0));
    }
    if (bytes.size() % kCifarRecordBytes != 0) {
        const std::size_t last = bytes.size() / kCifarRecordBytes * kCifarRecordBytes;
        fail(ErrorKind::Format, "CIFAR batch size " + std::to_string(bytes.size()) + " is not a multiple of " +
                                    std::to_string(kCifarRecordBytes) + "; incomplete record in " +
                                    at_offset(path, last));
    }
    const std::size_t plane = kCifarSide * kCifarSide;
    LabeledImageSet set;
    set.source = "cifar:" + path.filename().string();
    for (std::size_t base = 0; base < bytes.size(); base += kCifarRecordBytes) {
        set.labels.push_back(checked_label(bytes[base], path, base));
        Tensor img({kCifarSide, kCifarSide, 3});
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t k = 0; k < plane; ++k) {
                img.values[k * 3 + c] = to_unit(bytes[base + 1 + c * plane + k]);
            }
        }
        set.images.push_back(std::move(img));
    }
    return set;
}

LabeledImageSet load_cifar_batches(const std::vector<std::filesystem::path> &paths) {
    LabeledImageSet all;
    for (const auto &p : paths) {
        LabeledImageSet part = load_cifar_batch(p);
        all.source += (all.source.empty() ? "" : "+") + part.source;
        std::move(part.images.begin(), part.images.end(), std::back_inserter(all.images));
        all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
    }
    return all;
}

void save_idx(const LabeledImageSet &set, const std::filesystem::path &images_path,
              const std::filesystem::path &labels_path) {
    validate(set);
    const auto dims = set.image_dims();
    if (!set.images.empty() && dims[2] != 1) {
        fail(ErrorKind::Shape, "IDX images must have one channel, got " + shape_string(dims));
    }
    const std::size_t rows = set.images.empty() ? 0 : dims[0];
    const std::size_t cols = set.images.empty() ? 0 : dims[1];
    std::string img;
    write_be32(img, kIdxImageMagic);
    write_be32(img, static_cast<std::uint32_t>(set.size()));
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    std::string lab;
    write_be32(lab, kIdxLabelMagic);
    write_be32(lab, static_cast<std::uint32_t>(set.size()));
    for (std::size_t n = 0; n < set.size(); ++n) {
        for (double v : set.images[n].values) {
            img.push_back(static_cast<char>(to_byte(v)));
        }
        lab.push_back(static_cast<char>(set.labels[n]));
    }
    write_file_atomic(images_path, img);
    write_file_atomic(labels_path, lab);
}

void save_cifar_batch(const LabeledImageSet &set, const std::filesystem::path &path) {
    validate(set);
    if (!set.images.empty() && set.image_dims() != std::vector<std::size_t>{kCifarSide, kCifarSide, 3}) {
        fail(ErrorKind::Shape, "CIFAR records are 32x32x3, got " + shape_string(set.image_dims()));
    }
    const std::size_t plane = kCifarSide * kCifarSide;
    std::string out;
    out.reserve(set.size() * kCifarRecordBytes);
    for (std::size_t n = 0; n < set.size(); ++n) {
        out.push_back(static_cast<char>(set.labels[n]));
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t k = 0; k < plane; ++k) {
                out.push_back(static_cast<char>(to_byte(set.images[n].values[k * 3 + c])));
            }
        }
    }
    write_file_atomic(path, out);
}

Tensor resize_area(const Tensor &image, std::size_t rows, std::size_t cols) {
    if (image.rank() != 3) {
        fail(ErrorKind::Shape, "expected an H x W x C image, got " + shape_string(image.dims));
    }
    const std::size_t h = image.dims[0];
    const std::size_t w = image.dims[1];
    const std::size_t ch = image.dims[2];
    if (rows == 0 || cols == 0) {
        fail(ErrorKind::Shape, "target size must be positive");
    }
    if (rows > h || cols > w) {
        fail(ErrorKind::Unsupported, "resize_area only downscales (" + std::to_string(h) + "x" + std::to_string(w) +
                                         " -> " + std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }
    // Work in units where source pixel r spans [r*rows, (r+1)*rows) and
    // output pixel i spans [i*h, (i+1)*h); overlaps are exact integers.
    auto overlaps = [](std::size_t out_index, std::size_t src_len, std::size_t out_len) {
        std::vector<std::pair<std::size_t, std::size_t>> weights;
        const std::size_t lo = out_index * src_len;
        const std::size_t hi = lo + src_len;
        for (std::size_t r = lo / out_len; r * out_len < hi; ++r) {
            const std::size_t a = std::max(lo, r * out_len);
            const std::size_t b = std::min(hi, (r + 1) * out_len);
            if (b > a) {
                weights.emplace_back(r, b - a);
            }
        }
        return weights;
    };
    Tensor out({rows, cols, ch});
    for (std::size_t i = 0; i < rows; ++i) {
        const auto wr = overlaps(i, h, rows);
        for (std::size_t j = 0; j < cols; ++j) {
            const auto wc = overlaps(j, w, cols);
            const double area = static_cast<double>(h) * static_cast<double>(w);
            for (std::size_t c = 0; c < ch; ++c) {
                // Offset by one source value so constant regions stay exact.
                const double ref = image(wr.front().first, wc.front().first, c);
                double acc = 0.0;
                for (const auto &[r, a] : wr) {
                    for (const auto &[q, b] : wc) {
                        acc += static_cast<double>(a * b) * (image(r, q, c) - ref);
                    }
                }
                out(i, j, c) = std::clamp(ref + acc / area, 0.0, 1.0);
            }
        }
    }
    return out;
}

LabeledImageSet resize_area(const LabeledImageSet &set, std::size_t rows, std::size_t cols) {
    LabeledImageSet out;
    out.source = set.source + "@" + std::to_string(rows) + "x" + std::to_string(cols);
    out.labels = set.labels;
    out.images.reserve(set.size());
    for (const auto &img : set.images) {
        out.images.push_back(resize_area(img, rows, cols));
    }
    return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    NoiseRng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    return order;
}

LabeledImageSet sample_subset(const LabeledImageSet &set, std::size_t n, std::uint64_t seed) {
    if (n > set.size()) {
        fail(ErrorKind::Size, "cannot sample " + std::to_string(n) + " of " + std::to_string(set.size()) + " images");
    }
    const auto order = seeded_permutation(set.size(), seed);
    LabeledImageSet out;
    out.source = set.source + "|sample" + std::to_string(n) + "@seed" + std::to_string(seed);
    for (std::size_t k = 0; k < n; ++k) {
        out.images.push_back(set.images[order[k]]);
        out.labels.push_back(set.labels[order[k]]);
    }
    return out;
}

} // namespace qconv
