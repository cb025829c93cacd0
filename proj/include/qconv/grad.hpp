#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qconv/simcore.hpp"

namespace qconv {

using ParamVector = std::vector<double>;

/// Throws Arity / Config if `params` has the wrong length or non-finite entries.
void validate_params(const CircuitSpec &circuit, std::span<const double> params);

/// One evaluation of a shift rule: E(theta_i + shift) weighted by `coefficient`.
struct ShiftTerm {
    double shift;
    double coefficient;
};

/// Exact shift rule for an expectation whose dependence on one exponent is a
/// trigonometric polynomial with frequencies base, 2*base, ..., R*base.
std::vector<ShiftTerm> equidistant_shift_terms(std::size_t frequencies, double base_frequency);

/// Terms used for parameter `index`.
///
/// CZPow always has the single frequency pi, so the two-point rule
/// (pi/2)[E(theta + 1/2) - E(theta - 1/2)] is exact. The CXPow block
/// e^{i pi theta} Rx(pi theta) has phases {0, pi/2, 3pi/2} * theta; the
/// two-point rule stays exact only while nothing after the gate rotates its
/// control qubit out of the Z basis. Otherwise the three-frequency rule is
/// used (six evaluations).
std::vector<ShiftTerm> shift_terms_for(const CircuitSpec &circuit, std::size_t index);

/// Expectation as a function of the full parameter vector.
using ExpectationFn = std::function<double(std::span<const double>)>;

/// dE/dtheta_i for every parameter via the per-gate shift rules.
std::vector<double> shift_rule_gradient(const CircuitSpec &circuit, std::span<const double> params,
                                        std::span<const double> data_angles);

/// Same rules applied to an arbitrary evaluator (noisy expectations reuse this).
std::vector<double> shift_rule_gradient(const CircuitSpec &circuit, std::span<const double> params,
                                        const ExpectationFn &expectation);

/// Central differences; h must lie in (0, 0.1].
std::vector<double> finite_difference_gradient(const CircuitSpec &circuit, std::span<const double> params,
                                               std::span<const double> data_angles, double h);

} // namespace qconv
