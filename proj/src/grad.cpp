#include "qconv/grad.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qconv/error.hpp"

namespace qconv {

void validate_params(const CircuitSpec &circuit, std::span<const double> params) {
    if (params.size() != circuit.num_params()) {
        fail(ErrorKind::Arity, "expected " + std::to_string(circuit.num_params()) + " parameters, got " +
                                   std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!std::isfinite(params[i])) {
            fail(ErrorKind::Config, "parameter " + std::to_string(i) + " is not finite");
        }
    }
}

std::vector<ShiftTerm> equidistant_shift_terms(std::size_t frequencies, double base_frequency) {
    const double r = static_cast<double>(frequencies);
    std::vector<ShiftTerm> terms;
    terms.reserve(2 * frequencies);
    for (std::size_t mu = 1; mu <= 2 * frequencies; ++mu) {
        const double x = (2.0 * static_cast<double>(mu) - 1.0) * std::numbers::pi / (2.0 * r);
        const double sign = (mu % 2 == 1) ? 1.0 : -1.0;
        const double half = std::sin(x / 2.0);
        terms.push_back({x / base_frequency, base_frequency * sign / (4.0 * r * half * half)});
    }
    return terms;
}

namespace {

const std::vector<ShiftTerm> &two_term_rule() {
    static const std::vector<ShiftTerm> terms{{0.5, std::numbers::pi / 2.0}, {-0.5, -std::numbers::pi / 2.0}};
    return terms;
}

const std::vector<ShiftTerm> &three_frequency_rule() {
    static const std::vector<ShiftTerm> terms = equidistant_shift_terms(3, std::numbers::pi / 2.0);
    return terms;
}

} // namespace

std::vector<ShiftTerm> shift_terms_for(const CircuitSpec &circuit, std::size_t index) {
    const auto &gates = circuit.gates();
    for (std::size_t g = 0; g < gates.size(); ++g) {
        const auto &gate = gates[g];
        if (gate.kind == GateKind::RxData || gate.slot != index) {
            continue;
        }
        if (gate.kind == GateKind::CZPow) {
            return two_term_rule();
        }
        const std::size_t control = *gate.control;
        for (std::size_t later = g + 1; later < gates.size(); ++later) {
            const auto &next = gates[later];
            if (next.kind != GateKind::CZPow && next.target == control) {
                return three_frequency_rule();
            }
        }
        return two_term_rule();
    }
    // Parameter not referenced by any gate: E does not depend on it.
    return {};
}

std::vector<double> shift_rule_gradient(const CircuitSpec &circuit, std::span<const double> params,
                                        const ExpectationFn &expectation) {
    validate_params(circuit, params);
    std::vector<double> grad(params.size(), 0.0);
    std::vector<double> shifted(params.begin(), params.end());
    for (std::size_t i = 0; i < params.size(); ++i) {
        double acc = 0.0;
        for (const auto &term : shift_terms_for(circuit, i)) {
            shifted[i] = params[i] + term.shift;
            acc += term.coefficient * expectation(shifted);
        }
        shifted[i] = params[i];
        grad[i] = acc;
    }
    return grad;
}

std::vector<double> shift_rule_gradient(const CircuitSpec &circuit, std::span<const double> params,
                                        std::span<const double> data_angles) {
    check_arity(circuit, params, data_angles);
    StateVector state(circuit.num_qubits());
    return shift_rule_gradient(circuit, params, [&](std::span<const double> p) {
        run_circuit_into(state, circuit, p, data_angles);
        return expectation_z(state, circuit.observable_subset());
    });
}

std::vector<double> finite_difference_gradient(const CircuitSpec &circuit, std::span<const double> params,
                                               std::span<const double> data_angles, double h) {
    if (!(h > 0.0 && h <= 0.1)) {
        fail(ErrorKind::Step, "finite-difference step must lie in (0, 0.1], got " + std::to_string(h));
    }
    validate_params(circuit, params);
    check_arity(circuit, params, data_angles);
    StateVector state(circuit.num_qubits());
    auto eval = [&](std::span<const double> p) {
        run_circuit_into(state, circuit, p, data_angles);
        return expectation_z(state, circuit.observable_subset());
    };
    std::vector<double> grad(params.size());
    std::vector<double> shifted(params.begin(), params.end());
    for (std::size_t i = 0; i < params.size(); ++i) {
        shifted[i] = params[i] + h;
        const double up = eval(shifted);
        shifted[i] = params[i] - h;
        const double down = eval(shifted);
        shifted[i] = params[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

} // namespace qconv
