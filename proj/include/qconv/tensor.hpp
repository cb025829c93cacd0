#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace qconv {

/// Dense real n-d array, row-major.
struct Tensor {
    std::vector<std::size_t> dims;
    std::vector<double> values;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    /// Shape error when the value count does not match.
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] std::size_t rank() const noexcept { return dims.size(); }
    [[nodiscard]] bool empty() const noexcept { return dims.empty(); }

    double &operator()(std::size_t i, std::size_t j, std::size_t k) {
        return values[(i * dims[1] + j) * dims[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return values[(i * dims[1] + j) * dims[2] + k];
    }

    friend bool operator==(const Tensor &, const Tensor &) = default;
};

std::size_t element_count(const std::vector<std::size_t> &dims);
std::string shape_string(const std::vector<std::size_t> &dims);

/// H x W x C  ->  C x H x W
Tensor channels_first(const Tensor &image);

} // namespace qconv
