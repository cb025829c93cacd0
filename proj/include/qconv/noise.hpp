#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qconv/simcore.hpp"

namespace qconv {

struct NoiseConfig {
    double level = 0.0;
    std::size_t trajectories = 8;
    std::uint64_t seed = 0;
};

void validate(const NoiseConfig &noise);

enum class Pauli : std::uint8_t { X, Y, Z };

void apply_pauli(StateVector &state, std::size_t qubit, Pauli pauli);

using NoiseRng = std::mt19937_64;

/// Uniform double in [0, 1) from 53 random bits.
double uniform_unit(NoiseRng &rng);

/// Uniform integer in [0, n) by rejection; independent of the standard
/// library's distribution implementations.
std::size_t uniform_index(NoiseRng &rng, std::size_t n);

/// Mixes a base seed with a stream id (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// With probability `level` per qubit applies X, Y or Z (uniform).
/// Returns the Pauli inserted on each affected qubit, if any.
std::vector<std::optional<Pauli>> apply_depolarizing_after_gate(StateVector &state,
                                                                std::span<const std::size_t> qubits, double level,
                                                                NoiseRng &rng);

/// Trajectory mean of the circuit expectation with depolarizing noise after
/// every CZPow/CXPow on its two qubits. Level 0 returns the noiseless value.
double noisy_expectation(const CircuitSpec &circuit, std::span<const double> params,
                         std::span<const double> data_angles, const NoiseConfig &noise);

} // namespace qconv
