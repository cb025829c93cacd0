#include "qconv/simcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qconv/error.hpp"

namespace qconv {

std::string_view to_string(GateKind kind) {
    switch (kind) {
    case GateKind::RxData: return "RxData";
    case GateKind::CZPow: return "CZPow";
    case GateKind::CXPow: return "CXPow";
    }
    return "?";
}

StateVector::StateVector(std::size_t num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        fail(ErrorKind::Capacity, "state vector supports 1.." + std::to_string(kMaxQubits) + " qubits, got " +
                                      std::to_string(num_qubits));
    }
    amplitudes_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = Complex{1.0, 0.0};
}

double StateVector::norm_squared() const noexcept {
    double sum = 0.0;
    for (const auto &a : amplitudes_) {
        sum += std::norm(a);
    }
    return sum;
}

void StateVector::reset() noexcept {
    std::fill(amplitudes_.begin(), amplitudes_.end(), Complex{0.0, 0.0});
    amplitudes_[0] = Complex{1.0, 0.0};
}

CircuitSpec::CircuitSpec(std::size_t num_qubits, std::vector<GateApplication> gates, std::size_t num_params,
                         std::vector<std::size_t> observable_subset)
    : num_qubits_(num_qubits), gates_(std::move(gates)), num_params_(num_params), num_data_(0),
      observable_(std::move(observable_subset)) {
    if (num_qubits_ < 1 || num_qubits_ > kMaxQubits) {
        fail(ErrorKind::Capacity, "circuit supports 1.." + std::to_string(kMaxQubits) + " qubits, got " +
                                      std::to_string(num_qubits_));
    }
    for (std::size_t g = 0; g < gates_.size(); ++g) {
        const auto &gate = gates_[g];
        const std::string where = "gate " + std::to_string(g) + " (" + std::string(to_string(gate.kind)) + ")";
        if (gate.target >= num_qubits_) {
            fail(ErrorKind::Index, where + ": target " + std::to_string(gate.target) + " >= " +
                                       std::to_string(num_qubits_));
        }
        if (gate.kind == GateKind::RxData) {
            if (gate.control) {
                fail(ErrorKind::InvalidGate, where + ": RxData takes no control qubit");
            }
            if (gate.slot != num_data_) {
                fail(ErrorKind::InvalidGate, where + ": data slot " + std::to_string(gate.slot) +
                                                 " must follow circuit order (expected " +
                                                 std::to_string(num_data_) + ")");
            }
            ++num_data_;
            continue;
        }
        if (!gate.control) {
            fail(ErrorKind::InvalidGate, where + ": controlled gate without control qubit");
        }
        if (*gate.control >= num_qubits_) {
            fail(ErrorKind::Index, where + ": control " + std::to_string(*gate.control) + " >= " +
                                       std::to_string(num_qubits_));
        }
        if (*gate.control == gate.target) {
            fail(ErrorKind::InvalidGate, where + ": control equals target (" + std::to_string(gate.target) + ")");
        }
        if (gate.slot >= num_params_) {
            fail(ErrorKind::Index, where + ": parameter index " + std::to_string(gate.slot) + " >= " +
                                       std::to_string(num_params_));
        }
    }
    if (observable_.empty()) {
        fail(ErrorKind::InvalidObservable, "observable subset is empty");
    }
    for (std::size_t i = 0; i < observable_.size(); ++i) {
        if (observable_[i] >= num_qubits_) {
            fail(ErrorKind::InvalidObservable, "observable qubit " + std::to_string(observable_[i]) + " >= " +
                                                   std::to_string(num_qubits_));
        }
        if (i > 0 && observable_[i] <= observable_[i - 1]) {
            fail(ErrorKind::InvalidObservable, "observable subset must be sorted and duplicate-free");
        }
    }
}

CircuitSpec CircuitSpec::with_observable(std::vector<std::size_t> subset) const {
    return CircuitSpec(num_qubits_, gates_, num_params_, std::move(subset));
}

std::string CircuitSpec::dump() const {
    std::ostringstream out;
    out << "qconv-circuit v1\n";
    out << "qubits " << num_qubits_ << "\n";
    out << "params " << num_params_ << "\n";
    out << "data " << num_data_ << "\n";
    out << "observable";
    for (auto q : observable_) {
        out << ' ' << q;
    }
    out << "\n";
    for (const auto &gate : gates_) {
        out << to_string(gate.kind) << ' ';
        if (gate.control) {
            out << *gate.control;
        } else {
            out << '-';
        }
        out << ' ' << gate.target << ' ' << (gate.kind == GateKind::RxData ? "data:" : "param:") << gate.slot
            << "\n";
    }
    return out.str();
}

void check_qubit(const StateVector &state, std::size_t qubit) {
    if (qubit >= state.num_qubits()) {
        fail(ErrorKind::Index,
             "qubit " + std::to_string(qubit) + " out of range for " + std::to_string(state.num_qubits()) + " qubits");
    }
}

void apply_rx(StateVector &state, std::size_t qubit, double angle) {
    check_qubit(state, qubit);
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    const Complex off{0.0, -s};
    auto amps = state.amplitudes();
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t n = amps.size();
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a = amps[i];
            const Complex b = amps[i + stride];
            amps[i] = c * a + off * b;
            amps[i + stride] = off * a + c * b;
        }
    }
}

namespace {

// Visits every index with both `lo` and `hi` bits cleared.
template <typename F> void for_each_pair_base(std::size_t size, std::size_t lo, std::size_t hi, F &&body) {
    const std::size_t lo_mask = (std::size_t{1} << lo) - 1;
    const std::size_t hi_mask = (std::size_t{1} << hi) - 1;
    const std::size_t count = size >> 2;
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t idx = (k & lo_mask) | ((k & ~lo_mask) << 1);
        idx = (idx & hi_mask) | ((idx & ~hi_mask) << 1);
        body(idx);
    }
}

} // namespace

void apply_cpow(StateVector &state, std::size_t control, std::size_t target, GateKind kind, double exponent) {
    check_qubit(state, control);
    check_qubit(state, target);
    if (control == target) {
        fail(ErrorKind::InvalidGate, "control equals target (" + std::to_string(control) + ")");
    }
    if (kind == GateKind::RxData) {
        fail(ErrorKind::InvalidGate, "RxData is not a controlled gate");
    }
    auto amps = state.amplitudes();
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t lo = std::min(control, target);
    const std::size_t hi = std::max(control, target);
    const double phase = std::numbers::pi * exponent;
    const Complex g = std::polar(1.0, phase);

    if (kind == GateKind::CZPow) {
        for_each_pair_base(amps.size(), lo, hi, [&](std::size_t base) { amps[base | cmask | tmask] *= g; });
        return;
    }

    const Complex gc = g * std::cos(phase / 2.0);
    const Complex gs = g * Complex{0.0, -std::sin(phase / 2.0)};
    for_each_pair_base(amps.size(), lo, hi, [&](std::size_t base) {
        const std::size_t i = base | cmask;
        const std::size_t j = i | tmask;
        const Complex a = amps[i];
        const Complex b = amps[j];
        amps[i] = gc * a + gs * b;
        amps[j] = gs * a + gc * b;
    });
}

void apply_gate(StateVector &state, const GateApplication &gate, std::span<const double> params,
                std::span<const double> data_angles) {
    if (gate.kind == GateKind::RxData) {
        apply_rx(state, gate.target, data_angles[gate.slot]);
    } else {
        apply_cpow(state, *gate.control, gate.target, gate.kind, params[gate.slot]);
    }
}

// The leading RxData gates act on |0...0> and commute, so their output is
// the product state with amplitude prod_q (bit_q ? -i sin(a_q/2) : cos(a_q/2)),
// built in one doubling pass.
std::size_t prepare_data_layer(StateVector &state, const CircuitSpec &circuit, std::span<const double> data_angles) {
    if (state.num_qubits() != circuit.num_qubits()) {
        fail(ErrorKind::Shape, "state has " + std::to_string(state.num_qubits()) + " qubits, circuit has " +
                                   std::to_string(circuit.num_qubits()));
    }
    const auto &gates = circuit.gates();
    std::vector<double> angle(state.num_qubits(), 0.0);
    std::size_t g = 0;
    for (; g < gates.size() && gates[g].kind == GateKind::RxData; ++g) {
        angle[gates[g].target] += data_angles[gates[g].slot];
    }
    auto amps = state.amplitudes();
    amps[0] = Complex{1.0, 0.0};
    for (std::size_t q = 0; q < angle.size(); ++q) {
        const std::size_t half = std::size_t{1} << q;
        const double c = std::cos(angle[q] / 2.0);
        const Complex off{0.0, -std::sin(angle[q] / 2.0)};
        for (std::size_t i = 0; i < half; ++i) {
            amps[i + half] = amps[i] * off;
            amps[i] *= c;
        }
    }
    return g;
}

void check_arity(const CircuitSpec &circuit, std::span<const double> params, std::span<const double> data_angles) {
    if (params.size() != circuit.num_params()) {
        fail(ErrorKind::Arity, "expected " + std::to_string(circuit.num_params()) + " parameters, got " +
                                   std::to_string(params.size()));
    }
    if (data_angles.size() != circuit.num_data_angles()) {
        fail(ErrorKind::Arity, "expected " + std::to_string(circuit.num_data_angles()) + " data angles, got " +
                                   std::to_string(data_angles.size()));
    }
}

void run_circuit_into(StateVector &state, const CircuitSpec &circuit, std::span<const double> params,
                      std::span<const double> data_angles) {
    check_arity(circuit, params, data_angles);
    const auto &gates = circuit.gates();
    const std::size_t first = prepare_data_layer(state, circuit, data_angles);
    for (std::size_t g = first; g < gates.size(); ++g) {
        apply_gate(state, gates[g], params, data_angles);
    }
}

StateVector run_circuit(const CircuitSpec &circuit, std::span<const double> params,
                        std::span<const double> data_angles) {
    check_arity(circuit, params, data_angles);
    StateVector state(circuit.num_qubits());
    run_circuit_into(state, circuit, params, data_angles);
    return state;
}

double expectation_z(const StateVector &state, std::span<const std::size_t> subset) {
    if (subset.empty()) {
        fail(ErrorKind::InvalidObservable, "observable subset is empty");
    }
    std::uint64_t mask = 0;
    for (auto q : subset) {
        check_qubit(state, q);
        const std::uint64_t bit = std::uint64_t{1} << q;
        if (mask & bit) {
            fail(ErrorKind::InvalidObservable, "duplicate qubit " + std::to_string(q) + " in observable subset");
        }
        mask |= bit;
    }
    // sum_q Z_q on basis state i equals |Q| - 2 * popcount(i & mask).
    const auto amps = state.amplitudes();
    const double width = static_cast<double>(subset.size());
    double total = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const int ones = std::popcount(static_cast<std::uint64_t>(i) & mask);
        total += std::norm(amps[i]) * (width - 2.0 * ones);
    }
    return std::clamp(total / width, -1.0, 1.0);
}

double circuit_expectation(const CircuitSpec &circuit, std::span<const double> params,
                           std::span<const double> data_angles) {
    const StateVector state = run_circuit(circuit, params, data_angles);
    return expectation_z(state, circuit.observable_subset());
}

} // namespace qconv
