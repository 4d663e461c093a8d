#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "iqp/bits.hpp"

namespace iqp {

struct Edge {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Ising system on bits x with spins s = 1 - 2x and energy
///   E(s) = -sum_{(i,j)} w_ij s_i s_j - sum_i b_i s_i.
/// A positive bias b_i therefore favours s_i = +1, i.e. x_i = 0.
struct IsingSpec {
    std::size_t n_nodes = 0;
    std::vector<Edge> edges;
    std::vector<double> biases;
    /// Positive; may be +infinity (every proposal accepted).
    double temperature = 1.0;

    /// Throws on self-loops, out-of-range endpoints, bias length mismatch or
    /// a nonpositive temperature.
    void validate() const;
    double energy(std::uint64_t x) const;

    friend bool operator==(const IsingSpec&, const IsingSpec&) = default;
};

struct BlobSpec {
    BitMatrix patterns;
    double flip_prob = 0.05;
};

struct McmcConfig {
    std::size_t n_chains = 8;
    std::size_t burn_in_sweeps = 10000;
    /// Total kept samples across all chains.
    std::size_t samples = 1000;
    /// Sweeps between kept samples; one sweep is n_nodes single-site proposals.
    std::size_t thinning = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Single-site Metropolis chains with uniformly random site proposals. Chain c
/// uses derive_seed(seed, Mcmc, c) and keeps samples / n_chains rows (the
/// first samples % n_chains chains keep one more). Rows are ordered by chain.
BitMatrix metropolis_sample(const IsingSpec& spec, const McmcConfig& cfg);

/// Exact 2^n x 2^n transition kernel of one Metropolis proposal, row-major
/// with P[x * 2^n + y] = Pr(x -> y). n_nodes must be small (<= 12).
std::vector<double> metropolis_transition_matrix(const IsingSpec& spec);

/// Exact Boltzmann distribution, indexed by integer bitstrings (n <= 24).
std::vector<double> boltzmann_distribution(const IsingSpec& spec);

/// Periodic L x L lattice; couplings uniform in [low, high] from
/// derive_seed(mcmc.seed, Couplings); no biases.
std::pair<BitMatrix, IsingSpec> gen_ising_2d(std::size_t side, double temperature, double coupling_low,
                                             double coupling_high, const McmcConfig& mcmc);

/// Each row picks a pattern uniformly and flips every bit with flip_prob.
BitMatrix gen_blobs(const BlobSpec& spec, std::size_t count, std::uint64_t seed);

/// Barabasi-Albert graph: a star on nodes 0..m, then each new node attaches
/// to m distinct existing nodes chosen proportionally to degree. The result
/// has m (n - m) edges.
std::vector<Edge> barabasi_albert(std::size_t n_nodes, std::size_t m, std::uint64_t seed);

using BiasFn = std::function<double(std::size_t degree)>;

/// b_i = c * degree(i), biasing bits towards zero for c > 0.
BiasFn linear_degree_bias(double c = 0.1);

/// BA graph with unit couplings and degree-dependent biases, sampled by
/// Metropolis. The graph uses derive_seed(mcmc.seed, Graph).
std::pair<BitMatrix, IsingSpec> gen_scale_free(std::size_t n_nodes, std::size_t ba_connectivity, double temperature,
                                               const BiasFn& bias_fn, const McmcConfig& mcmc,
                                               double coupling = 1.0);

enum class DatasetFormat { Text, Packed };

/// Picks Packed for a ".iqpb" extension and Text otherwise.
DatasetFormat format_for_path(const std::string& path);

void save_dataset(const std::string& path, const BitMatrix& data, DatasetFormat format);
BitMatrix load_dataset(const std::string& path, DatasetFormat format);
void write_text_dataset(std::ostream& out, const BitMatrix& data);
BitMatrix read_text_dataset(std::istream& in);
void write_packed_dataset(std::ostream& out, const BitMatrix& data);
BitMatrix read_packed_dataset(std::istream& in);

/// Text form with named sections: "nodes N", "temperature T",
/// "edges M" followed by M lines "i j w", "biases" followed by N values.
void write_ising_spec(std::ostream& out, const IsingSpec& spec);
IsingSpec read_ising_spec(std::istream& in);

/// Seeded shuffle, then the first floor(rows * test_fraction) rows form the
/// test set. Returns (train, test). Both parts must be nonempty.
std::pair<BitMatrix, BitMatrix> train_test_split(const BitMatrix& data, double test_fraction, std::uint64_t seed);

}  // namespace iqp
