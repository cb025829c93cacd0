#pragma once

/**
 * @file
 * Dense statevector simulator for the {Rx, CZPow, CXPow} gate set.
 *
 * Qubit q maps to bit q of the amplitude index (little-endian). Gates are
 * applied in place over amplitude pairs; no 2^n x 2^n matrix is ever built.
 */

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qconv {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 24;

class StateVector {
  public:
    /// |0...0> on `num_qubits` qubits. Throws Capacity outside 1..24.
    explicit StateVector(std::size_t num_qubits);

    [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] std::size_t size() const noexcept { return amplitudes_.size(); }

    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] std::span<Complex> amplitudes() noexcept { return amplitudes_; }

    const Complex &operator[](std::size_t i) const { return amplitudes_[i]; }
    Complex &operator[](std::size_t i) { return amplitudes_[i]; }

    /// Sum of |a_i|^2.
    [[nodiscard]] double norm_squared() const noexcept;

    /// Resets to |0...0> without reallocating.
    void reset() noexcept;

  private:
    std::size_t num_qubits_;
    std::vector<Complex> amplitudes_;
};

enum class GateKind : std::uint8_t { RxData, CZPow, CXPow };

std::string_view to_string(GateKind kind);

/// One gate in a circuit. For RxData, `slot` indexes the data-angle list;
/// for CZPow/CXPow it indexes the trainable parameter vector.
struct GateApplication {
    GateKind kind;
    std::size_t target;
    std::optional<std::size_t> control;
    std::size_t slot;

    friend bool operator==(const GateApplication &, const GateApplication &) = default;
};

/// Immutable circuit description. Construction validates every invariant.
class CircuitSpec {
  public:
    CircuitSpec(std::size_t num_qubits, std::vector<GateApplication> gates, std::size_t num_params,
                std::vector<std::size_t> observable_subset);

    [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] const std::vector<GateApplication> &gates() const noexcept { return gates_; }
    [[nodiscard]] std::size_t num_params() const noexcept { return num_params_; }
    [[nodiscard]] std::size_t num_data_angles() const noexcept { return num_data_; }
    [[nodiscard]] const std::vector<std::size_t> &observable_subset() const noexcept { return observable_; }

    /// Same gates, different measured subset.
    [[nodiscard]] CircuitSpec with_observable(std::vector<std::size_t> subset) const;

    /// Deterministic one-gate-per-line text form.
    [[nodiscard]] std::string dump() const;

    friend bool operator==(const CircuitSpec &, const CircuitSpec &) = default;

  private:
    std::size_t num_qubits_;
    std::vector<GateApplication> gates_;
    std::size_t num_params_;
    std::size_t num_data_;
    std::vector<std::size_t> observable_;
};

/// Index-valued sanity check used by the builders and the noise module.
void check_qubit(const StateVector &state, std::size_t qubit);

void apply_rx(StateVector &state, std::size_t qubit, double angle);

/// CZPow / CXPow on a control/target pair: the controlled block is
/// diag(1, e^{i pi theta}) or e^{i pi theta} * Rx(pi theta).
void apply_cpow(StateVector &state, std::size_t control, std::size_t target, GateKind kind, double exponent);

/// Dispatches a single gate using `params` / `data_angles` for its slot.
void apply_gate(StateVector &state, const GateApplication &gate, std::span<const double> params,
                std::span<const double> data_angles);

/// Checks `params` and `data_angles` lengths against the circuit.
void check_arity(const CircuitSpec &circuit, std::span<const double> params, std::span<const double> data_angles);

StateVector run_circuit(const CircuitSpec &circuit, std::span<const double> params,
                        std::span<const double> data_angles);

/// Writes the state reached from |0...0> by the circuit's leading RxData
/// gates (in one pass) and returns the index of the first remaining gate.
std::size_t prepare_data_layer(StateVector &state, const CircuitSpec &circuit, std::span<const double> data_angles);

/// Same as run_circuit but reuses `state` (must have the circuit's width).
void run_circuit_into(StateVector &state, const CircuitSpec &circuit, std::span<const double> params,
                      std::span<const double> data_angles);

/// Arithmetic mean of <Z_q> over `subset`.
double expectation_z(const StateVector &state, std::span<const std::size_t> subset);

/// run_circuit followed by expectation_z on the circuit's observable subset.
double circuit_expectation(const CircuitSpec &circuit, std::span<const double> params,
                           std::span<const double> data_angles);

} // namespace qconv
