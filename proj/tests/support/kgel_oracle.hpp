#pragma once

// Brute-force primal solve of the KGEL problem on tiny grouped instances.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"

namespace oracle {

inline double kernel(std::uint64_t x, std::uint64_t y, double sigma) {
    return std::exp(-std::popcount(x ^ y) / (2 * sigma * sigma));
}

struct GroupedInstance {
    std::vector<std::uint64_t> distinct;
    std::vector<std::size_t> mult;
    std::vector<std::uint64_t> witnesses;
    std::size_t n = 0;
    double sigma = 1.0;

    iqp::BitMatrix test_rows() const {
        std::vector<std::uint64_t> rows;
        for (std::size_t g = 0; g < distinct.size(); ++g) rows.insert(rows.end(), mult[g], distinct[g]);
        return oracle::rows_from_masks(rows, n);
    }
    std::size_t total() const {
        std::size_t t = 0;
        for (auto m : mult) t += m;
        return t;
    }
};

// Minimum KL over group masses M (rows in a group share pi equally) subject to
// sum M = 1 and the witness moments. Requires groups = witnesses + 2, so the
// feasible set is a segment searched by ternary search on the convex objective.
inline double primal_kl(const GroupedInstance& inst, const std::vector<double>& rhs) {
    const std::size_t g = inst.distinct.size(), w = inst.witnesses.size();
    if (g != w + 2) throw std::invalid_argument("primal_kl needs groups = witnesses + 2");
    Eigen::MatrixXd c(w + 1, g);
    Eigen::VectorXd b(w + 1);
    for (std::size_t k = 0; k < g; ++k) c(0, k) = 1.0;
    b(0) = 1.0;
    for (std::size_t r = 0; r < w; ++r) {
        for (std::size_t k = 0; k < g; ++k) c(r + 1, k) = kernel(inst.distinct[k], inst.witnesses[r], inst.sigma);
        b(r + 1) = rhs[r];
    }
    const Eigen::VectorXd m0 = c.completeOrthogonalDecomposition().solve(b);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
    const Eigen::VectorXd dir = lu.kernel().col(0);
    double lo = -1e9, hi = 1e9;
    for (std::size_t k = 0; k < g; ++k) {
        if (std::abs(dir(k)) < 1e-15) continue;
        const double t = -m0(k) / dir(k);
        if (dir(k) > 0) lo = std::max(lo, t);
        else hi = std::min(hi, t);
    }
    if (!(lo < hi)) throw std::invalid_argument("primal_kl: empty feasible segment");
    const double n = static_cast<double>(inst.total());
    auto kl = [&](double t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < g; ++k) {
            const double m = std::max(0.0, m0(k) + t * dir(k));
            if (m > 0) acc += m * std::log(n * m / static_cast<double>(inst.mult[k]));
        }
        return acc;
    };
    for (int it = 0; it < 300; ++it) {
        const double a = lo + (hi - lo) / 3, bb = hi - (hi - lo) / 3;
        if (kl(a) < kl(bb)) hi = bb;
        else lo = a;
    }
    return kl((lo + hi) / 2);
}

inline std::vector<double> rhs_from_mixture(const GroupedInstance& inst, const std::vector<double>& mass) {
    std::vector<double> rhs;
    for (auto t : inst.witnesses) {
        double acc = 0.0;
        for (std::size_t k = 0; k < inst.distinct.size(); ++k) acc += mass[k] * kernel(inst.distinct[k], t, inst.sigma);
        rhs.push_back(acc);
    }
    return rhs;
}

}  // namespace oracle
