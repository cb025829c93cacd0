#pragma once

#include <cstddef>
#include <span>

namespace qconv {

inline constexpr double kProbabilityFloor = 1e-12;

/// -log(max(probs[label], 1e-12)). Label error when `label` is out of range,
/// Normalization error when probs do not sum to 1 within 1e-6.
double cross_entropy(std::span<const double> probs, std::size_t label);

/// d loss / d probs for the same floored loss.
void cross_entropy_gradient(std::span<const double> probs, std::size_t label, std::span<double> out);

} // namespace qconv
