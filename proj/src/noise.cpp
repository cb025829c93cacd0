#include "qconv/noise.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "qconv/error.hpp"

namespace qconv {

void validate(const NoiseConfig &noise) {
    if (!(noise.level >= 0.0 && noise.level <= 1.0)) {
        fail(ErrorKind::Config, "noise level must lie in [0, 1], got " + std::to_string(noise.level));
    }
    if (noise.trajectories < 1) {
        fail(ErrorKind::Config, "noise trajectories must be >= 1");
    }
}

void apply_pauli(StateVector &state, std::size_t qubit, Pauli pauli) {
    check_qubit(state, qubit);
    auto amps = state.amplitudes();
    const std::size_t stride = std::size_t{1} << qubit;
    for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            Complex &a = amps[i];
            Complex &b = amps[i + stride];
            switch (pauli) {
            case Pauli::X: std::swap(a, b); break;
            case Pauli::Y: {
                const Complex a0 = a;
                a = Complex{b.imag(), -b.real()};   // -i * b
                b = Complex{-a0.imag(), a0.real()}; // i * a
                break;
            }
            case Pauli::Z: b = -b; break;
            }
        }
    }
}

double uniform_unit(NoiseRng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(NoiseRng &rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = NoiseRng::max() - NoiseRng::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return static_cast<std::size_t>(x % bound);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<std::optional<Pauli>> apply_depolarizing_after_gate(StateVector &state,
                                                                std::span<const std::size_t> qubits, double level,
                                                                NoiseRng &rng) {
    static constexpr std::array<Pauli, 3> kPaulis{Pauli::X, Pauli::Y, Pauli::Z};
    std::vector<std::optional<Pauli>> inserted(qubits.size());
    for (std::size_t k = 0; k < qubits.size(); ++k) {
        if (uniform_unit(rng) < level) {
            const Pauli p = kPaulis[uniform_index(rng, 3)];
            apply_pauli(state, qubits[k], p);
            inserted[k] = p;
        }
    }
    return inserted;
}

double noisy_expectation(const CircuitSpec &circuit, std::span<const double> params,
                         std::span<const double> data_angles, const NoiseConfig &noise) {
    validate(noise);
    check_arity(circuit, params, data_angles);
    if (noise.level == 0.0) {
        return circuit_expectation(circuit, params, data_angles);
    }
    StateVector initial(circuit.num_qubits());
    const std::size_t first = prepare_data_layer(initial, circuit, data_angles);
    const auto &gates = circuit.gates();
    StateVector state = initial;
    double total = 0.0;
    for (std::size_t t = 0; t < noise.trajectories; ++t) {
        NoiseRng rng(derive_seed(noise.seed, t));
        std::ranges::copy(initial.amplitudes(), state.amplitudes().begin());
        for (std::size_t g = first; g < gates.size(); ++g) {
            const auto &gate = gates[g];
            apply_gate(state, gate, params, data_angles);
            if (gate.kind != GateKind::RxData) {
                const std::array<std::size_t, 2> touched{*gate.control, gate.target};
                apply_depolarizing_after_gate(state, touched, noise.level, rng);
            }
        }
        total += expectation_z(state, circuit.observable_subset());
    }
    return std::clamp(total / static_cast<double>(noise.trajectories), -1.0, 1.0);
}

} // namespace qconv
