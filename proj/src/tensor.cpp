#include "qconv/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "qconv/error.hpp"

namespace qconv {

std::size_t element_count(const std::vector<std::size_t> &dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t> &dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) {
            out += 'x';
        }
        out += std::to_string(dims[i]);
    }
    return out.empty() ? "scalar" : out;
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : dims(std::move(shape)), values(element_count(dims), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data) : dims(std::move(shape)), values(std::move(data)) {
    if (element_count(dims) != values.size()) {
        fail(ErrorKind::Shape, "dims " + shape_string(dims) + " need " + std::to_string(element_count(dims)) +
                                   " values, got " + std::to_string(values.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            fail(ErrorKind::Shape, "tensor values must be finite");
        }
    }
}

Tensor channels_first(const Tensor &image) {
    if (image.rank() != 3) {
        fail(ErrorKind::Shape, "expected an H x W x C image, got " + shape_string(image.dims));
    }
    const std::size_t h = image.dims[0];
    const std::size_t w = image.dims[1];
    const std::size_t c = image.dims[2];
    Tensor out({c, h, w});
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            for (std::size_t k = 0; k < c; ++k) {
                out(k, i, j) = image(i, j, k);
            }
        }
    }
    return out;
}

} // namespace qconv
