#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"

namespace iqp {

/// Default qubit limit for the brute-force paths (2^20 table entries).
inline constexpr std::size_t kDefaultExactLimit = 20;

/// Basis states z are indexed by integers whose bit i is qubit i.
struct PhaseTable {
    std::size_t n = 0;
    /// phi_z = sum_j theta_j (-1)^{g_j . z}; the diagonal circuit's eigenvalue is exp(i phi_z).
    std::vector<double> phases;
};

/// Built as a Walsh-Hadamard transform of the sparse coefficient vector
/// h[g_j] = theta_j. Throws LimitError when n_qubits > exact_limit.
PhaseTable exact_phase_table(const GateSet& gates, const ParamVector& params,
                             std::size_t exact_limit = kDefaultExactLimit);

/// Full output distribution, length 2^n, indexed like PhaseTable.
std::vector<double> exact_probabilities(const GateSet& gates, const ParamVector& params, ModelKind kind,
                                        std::size_t exact_limit = kDefaultExactLimit);

/// <Z_a> for an observable given as an integer mask, by direct summation over
/// the phase table (IQP, IQPSymmetrized) or the closed form (Bitflip).
double exact_expval(const GateSet& gates, const ParamVector& params, std::uint64_t observable,
                    ModelKind kind = ModelKind::IQP, std::size_t exact_limit = kDefaultExactLimit);

/// Row-wise exact_expval for a batch of observables.
std::vector<double> exact_expvals(const GateSet& gates, const ParamVector& params, const BitMatrix& observables,
                                  ModelKind kind = ModelKind::IQP, std::size_t exact_limit = kDefaultExactLimit);

/// Rows drawn from the stochastic bitflip circuit: starting from all zeros,
/// gate j flips its subset with probability sin^2(theta_j).
BitMatrix sample_bitflip(const GateSet& gates, const ParamVector& params, std::size_t count, std::uint64_t seed);

/// Inverse-CDF sampling from exact_probabilities.
BitMatrix sample_exact(const GateSet& gates, const ParamVector& params, ModelKind kind, std::size_t count,
                       std::uint64_t seed, std::size_t exact_limit = kDefaultExactLimit);

/// Inverse-CDF sampling from any distribution over n-bit strings.
BitMatrix sample_distribution(std::span<const double> probabilities, std::size_t n, std::size_t count,
                              std::uint64_t seed);

/// In-place unnormalised Walsh-Hadamard transform; size must be a power of two.
void walsh_hadamard(std::span<double> values);

/// Integer mask of a packed row of width <= 64.
inline std::uint64_t row_mask(BitRow row) { return row.empty() ? 0 : row[0]; }

}  // namespace iqp
