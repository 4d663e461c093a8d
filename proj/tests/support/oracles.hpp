#pragma once

// Brute-force reference implementations used only by the tests. They share no
// code with the library paths they check.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"

namespace oracle {

using Cvec = std::vector<std::complex<double>>;

inline std::uint64_t mask_of(const std::vector<std::uint32_t>& g) {
    std::uint64_t m = 0;
    for (auto q : g) m |= std::uint64_t{1} << q;
    return m;
}

/// Applies exp(i theta X_g) to a state vector: cos(theta) psi + i sin(theta) X_g psi.
inline void apply_x_rotation(Cvec& psi, std::uint64_t g, double theta) {
    Cvec out(psi.size());
    const std::complex<double> c(std::cos(theta), 0.0);
    const std::complex<double> s(0.0, std::sin(theta));
    for (std::size_t x = 0; x < psi.size(); ++x) out[x] = c * psi[x] + s * psi[x ^ g];
    psi.swap(out);
}

/// Output distribution of exp(i sum_j theta_j X_{g_j}) on |0..0> (or the GHZ
/// state), by direct gate-by-gate state-vector evolution.
inline std::vector<double> statevector_probs(std::size_t n, const std::vector<std::vector<std::uint32_t>>& gens,
                                             const std::vector<double>& theta, bool ghz) {
    const std::size_t size = std::size_t{1} << n;
    Cvec psi(size, 0.0);
    if (ghz) {
        psi[0] = psi[size - 1] = 1.0 / std::sqrt(2.0);
    } else {
        psi[0] = 1.0;
    }
    for (std::size_t j = 0; j < gens.size(); ++j) apply_x_rotation(psi, mask_of(gens[j]), theta[j]);
    std::vector<double> p(size);
    for (std::size_t x = 0; x < size; ++x) p[x] = std::norm(psi[x]);
    return p;
}

/// Bitflip model distribution by enumerating all 2^m flip patterns.
inline std::vector<double> bitflip_probs(std::size_t n, const std::vector<std::vector<std::uint32_t>>& gens,
                                         const std::vector<double>& theta) {
    std::vector<double> p(std::size_t{1} << n, 0.0);
    const std::size_t m = gens.size();
    for (std::uint64_t pat = 0; pat < (std::uint64_t{1} << m); ++pat) {
        double w = 1.0;
        std::uint64_t x = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const double s2 = std::sin(theta[j]) * std::sin(theta[j]);
            if ((pat >> j) & 1U) {
                w *= s2;
                x ^= mask_of(gens[j]);
            } else {
                w *= 1.0 - s2;
            }
        }
        p[x] += w;
    }
    return p;
}

inline double parity_expectation(const std::vector<double>& p, std::uint64_t a) {
    double acc = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) acc += (std::popcount(x & a) & 1) ? -p[x] : p[x];
    return acc;
}

/// phi_z = sum_j theta_j (-1)^{g_j . z}, one z at a time.
inline double direct_phase(const std::vector<std::vector<std::uint32_t>>& gens, const std::vector<double>& theta,
                           std::uint64_t z) {
    double acc = 0.0;
    for (std::size_t j = 0; j < gens.size(); ++j)
        acc += (std::popcount(mask_of(gens[j]) & z) & 1) ? -theta[j] : theta[j];
    return acc;
}

/// sum_{x,y} (p - q)(x) (p - q)(y) exp(-|x ^ y| / (2 sigma^2)).
inline double kernel_mmd(const std::vector<double>& p, const std::vector<double>& q, double sigma) {
    double acc = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x)
        for (std::size_t y = 0; y < p.size(); ++y)
            acc += (p[x] - q[x]) * (p[y] - q[y]) * std::exp(-std::popcount(x ^ y) / (2.0 * sigma * sigma));
    return acc;
}

/// Two-qubit closed form with q_i = cos^2(theta_i) for gates {0}, {1}, {0,1};
/// index bit 0 is qubit 0.
inline std::vector<double> two_qubit_closed_form(double t1, double t2, double t12) {
    const double q1 = std::cos(t1) * std::cos(t1);
    const double q2 = std::cos(t2) * std::cos(t2);
    const double q12 = std::cos(t12) * std::cos(t12);
    const double r1 = 1 - q1, r2 = 1 - q2, r12 = 1 - q12;
    std::vector<double> p(4);
    p[0b00] = q1 * q2 * q12 + r1 * r2 * r12;
    p[0b11] = q1 * q2 * r12 + r1 * r2 * q12;
    p[0b01] = r1 * q2 * q12 + q1 * r2 * r12;  // qubit 0 set
    p[0b10] = q1 * r2 * q12 + r1 * q2 * r12;  // qubit 1 set
    return p;
}

struct RandomCircuit {
    std::size_t n = 0;
    std::vector<std::vector<std::uint32_t>> gens;
    std::vector<double> theta;
};

/// Distinct random nonempty generators of size <= max_size, angles in [0, 2 pi).
inline RandomCircuit random_circuit(std::mt19937_64& rng, std::size_t n, std::size_t m, std::size_t max_size = 3) {
    RandomCircuit c;
    c.n = n;
    std::set<std::vector<std::uint32_t>> seen;
    std::uniform_int_distribution<std::size_t> size_dist(1, std::min(max_size, n));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::size_t attempts = 0;
    while (c.gens.size() < m && attempts++ < 100000) {
        const std::size_t k = size_dist(rng);
        std::vector<std::uint32_t> all(n);
        for (std::uint32_t i = 0; i < n; ++i) all[i] = i;
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<std::uint32_t> g(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(g.begin(), g.end());
        if (seen.insert(g).second) c.gens.push_back(g);
    }
    for (std::size_t j = 0; j < c.gens.size(); ++j) c.theta.push_back(angle(rng));
    return c;
}

inline iqp::BitMatrix rows_from_masks(const std::vector<std::uint64_t>& masks, std::size_t n) {
    iqp::BitMatrix m(masks.size(), n);
    for (std::size_t i = 0; i < masks.size(); ++i)
        for (std::size_t b = 0; b < n; ++b)
            if ((masks[i] >> b) & 1U) m.set(i, b, true);
    return m;
}

}  // namespace oracle
