#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iqp/bits.hpp"

namespace iqp {

enum class ModelKind { IQP, Bitflip, IQPSymmetrized };

std::string_view to_string(ModelKind kind);
/// Accepts "iqp", "bitflip", "iqp-symmetrized" (case-sensitive).
ModelKind parse_model_kind(std::string_view text);

/// Ordered X-generator subsets of a parameterised IQP circuit. Parameter j
/// binds to generator j. Stored sparsely (CSR) together with the inverse
/// qubit -> gates incidence, which is what the estimators iterate over.
class GateSet {
public:
    GateSet() = default;
    /// Sorts each subset; throws on empty subsets, repeated or out-of-range
    /// indices, duplicate generators, or n_qubits == 0.
    GateSet(std::size_t n_qubits, const std::vector<std::vector<std::uint32_t>>& generators);

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

    std::span<const std::uint32_t> generator(std::size_t j) const {
        return {indices_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
    }
    /// Gates whose subset contains qubit q, ascending.
    std::span<const std::uint32_t> gates_on(std::size_t q) const {
        return {incidence_.data() + inc_offsets_[q], inc_offsets_[q + 1] - inc_offsets_[q]};
    }
    /// Generator j as a packed bit row of width n_qubits.
    std::vector<Word> mask(std::size_t j) const;
    /// Generator j as an integer mask (requires n_qubits <= 64).
    std::uint64_t small_mask(std::size_t j) const;

    std::vector<std::vector<std::uint32_t>> generators() const;

    /// Gates anticommuting with Z_a, i.e. |g_j & a| odd, ascending. `scratch`
    /// must have size() entries, all zero on entry; it is restored on exit.
    void anticommuting(std::span<const std::uint32_t> observable_bits, std::vector<std::uint8_t>& scratch,
                       std::vector<std::uint32_t>& out) const;

    friend bool operator==(const GateSet& a, const GateSet& b) {
        return a.n_qubits_ == b.n_qubits_ && a.offsets_ == b.offsets_ && a.indices_ == b.indices_;
    }

private:
    std::size_t n_qubits_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> indices_;
    std::vector<std::size_t> inc_offsets_;
    std::vector<std::uint32_t> incidence_;
};

/// Trainable angles, one per generator, in radians. Always finite.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::vector<double> values);
    static ParamVector zeros(std::size_t n) { return ParamVector(std::vector<double>(n, 0.0)); }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t j) const { return values_[j]; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const ParamVector&, const ParamVector&) = default;

private:
    std::vector<double> values_;
};

/// Throws ShapeError unless params has one entry per generator.
void check_bound(const GateSet& gates, const ParamVector& params);

}  // namespace iqp
