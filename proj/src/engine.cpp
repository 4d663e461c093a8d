#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iqp/errors.hpp"

namespace iqp::detail {

PreparedZ::PreparedZ(const BitMatrix& z) : columns(z), odd_weight(z.rows()), count(z.rows()) {
    for (std::size_t j = 0; j < z.rows(); ++j) odd_weight[j] = static_cast<std::uint8_t>(hamming_weight(z.row(j)) & 1U);
}

ObservableWorker::ObservableWorker(const GateSet& gates, const ParamVector& params, const PreparedZ* z,
                                   ModelKind kind)
    : gates_(gates), params_(params), z_(z), kind_(kind), scratch_(gates.size(), 0) {
    phi_.resize(kZChunk);
    d_.resize(kZChunk);
    fd_.resize(kZChunk);
}

namespace {

// phi[i] += t * (-1)^{bit i of s}, for the first `len` rows of a chunk.
inline void accumulate_signed(const Word* s, std::size_t len, double t, double* phi) {
    const double t2 = 2.0 * t;
    std::size_t w = 0;
    for (; (w + 1) * kWordBits <= len; ++w) {
        const Word bits = s[w];
        double* p = phi + w * kWordBits;
        for (unsigned b = 0; b < kWordBits; ++b) p[b] += t - t2 * static_cast<double>((bits >> b) & 1U);
    }
    const std::size_t rest = len - w * kWordBits;
    if (rest != 0) {
        const Word bits = s[w];
        double* p = phi + w * kWordBits;
        for (unsigned b = 0; b < rest; ++b) p[b] += t - t2 * static_cast<double>((bits >> b) & 1U);
    }
}

// Sum of x[i] over rows whose bit in s is set.
inline double masked_sum(const Word* s, std::size_t len, const double* x) {
    double acc = 0.0;
    std::size_t w = 0;
    for (; (w + 1) * kWordBits <= len; ++w) {
        const Word bits = s[w];
        const double* p = x + w * kWordBits;
        double part = 0.0;
        for (unsigned b = 0; b < kWordBits; ++b) part += static_cast<double>((bits >> b) & 1U) * p[b];
        acc += part;
    }
    const std::size_t rest = len - w * kWordBits;
    if (rest != 0) {
        const Word bits = s[w];
        const double* p = x + w * kWordBits;
        for (unsigned b = 0; b < rest; ++b) acc += static_cast<double>((bits >> b) & 1U) * p[b];
    }
    return acc;
}

}  // namespace

void ObservableWorker::evaluate(std::span<const std::uint32_t> observable_bits, bool want_grad) {
    gates_.anticommuting(observable_bits, scratch_, active_);
    const std::size_t n_active = active_.size();
    sum_f = 0.0;
    sum_f2 = 0.0;
    sq_dev = 0.0;
    double running_mean = 0.0;
    if (want_grad) {
        u.assign(n_active, 0.0);
        v.assign(n_active, 0.0);
    }
    const bool symmetric = kind_ == ModelKind::IQPSymmetrized;
    const double base_weight = (observable_bits.size() % 2 == 0) ? 1.0 : 0.0;
    const std::span<const double> theta = params_.values();
    parity_.resize(n_active * kChunkWords);

    for (std::size_t start = 0; start < z_->count; start += kZChunk) {
        const std::size_t len = std::min(kZChunk, z_->count - start);
        const std::size_t words = words_for_bits(len);
        const std::size_t word_begin = start / kWordBits;
        std::fill(phi_.begin(), phi_.begin() + static_cast<std::ptrdiff_t>(len), 0.0);
        for (std::size_t k = 0; k < n_active; ++k) {
            const std::uint32_t l = active_[k];
            Word* s = parity_.data() + k * kChunkWords;
            z_->columns.xor_columns(gates_.generator(l), word_begin, {s, words});
            accumulate_signed(s, len, 2.0 * theta[l], phi_.data());
        }
        double chunk_d = 0.0;
        double chunk_fd = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            double weight = 1.0;
            if (symmetric) weight = base_weight + (z_->odd_weight[start + j] ? -1.0 : 1.0);
            const double f = weight * std::cos(phi_[j]);
            sum_f += f;
            sum_f2 += f * f;
            const double delta = f - running_mean;
            running_mean += delta / static_cast<double>(start + j + 1);
            sq_dev += delta * (f - running_mean);
            if (want_grad) {
                const double d = weight * std::sin(phi_[j]);
                d_[j] = d;
                fd_[j] = f * d;
                chunk_d += d;
                chunk_fd += f * d;
            }
        }
        if (want_grad) {
            for (std::size_t k = 0; k < n_active; ++k) {
                const Word* s = parity_.data() + k * kChunkWords;
                u[k] += chunk_d - 2.0 * masked_sum(s, len, d_.data());
                v[k] += chunk_fd - 2.0 * masked_sum(s, len, fd_.data());
            }
        }
    }
}

double ObservableWorker::evaluate_bitflip(std::span<const std::uint32_t> observable_bits, bool want_grad) {
    gates_.anticommuting(observable_bits, scratch_, active_);
    const std::size_t n_active = active_.size();
    const std::span<const double> theta = params_.values();
    // prefix_[k] = prod_{i<k} cos(2 theta), product without division so zeros are safe.
    prefix_.resize(n_active + 1);
    prefix_[0] = 1.0;
    for (std::size_t k = 0; k < n_active; ++k) prefix_[k + 1] = prefix_[k] * std::cos(2.0 * theta[active_[k]]);
    if (want_grad) {
        u.assign(n_active, 0.0);
        double suffix = 1.0;
        for (std::size_t k = n_active; k-- > 0;) {
            const double t = theta[active_[k]];
            u[k] = -2.0 * std::sin(2.0 * t) * prefix_[k] * suffix;
            suffix *= std::cos(2.0 * t);
        }
    }
    return prefix_[n_active];
}

void require_width(const BitMatrix& m, std::size_t n, const char* what) {
    if (m.width() != n)
        throw ShapeError(std::string(what) + " width " + std::to_string(m.width()) + " does not match n_qubits " +
                         std::to_string(n));
}

}  // namespace iqp::detail
