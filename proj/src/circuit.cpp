#include "iqp/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "iqp/errors.hpp"

namespace iqp {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::IQP: return "iqp";
        case ModelKind::Bitflip: return "bitflip";
        case ModelKind::IQPSymmetrized: return "iqp-symmetrized";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "iqp") return ModelKind::IQP;
    if (text == "bitflip") return ModelKind::Bitflip;
    if (text == "iqp-symmetrized") return ModelKind::IQPSymmetrized;
    throw std::invalid_argument("unknown model kind '" + std::string(text) +
                                "' (expected iqp, bitflip or iqp-symmetrized)");
}

GateSet::GateSet(std::size_t n_qubits, const std::vector<std::vector<std::uint32_t>>& generators)
    : n_qubits_(n_qubits) {
    if (n_qubits == 0) throw ShapeError("GateSet needs at least one qubit");
    std::set<std::vector<std::uint32_t>> seen;
    offsets_.reserve(generators.size() + 1);
    std::vector<std::size_t> degree(n_qubits, 0);
    for (std::size_t j = 0; j < generators.size(); ++j) {
        std::vector<std::uint32_t> g = generators[j];
        if (g.empty()) throw ShapeError("generator " + std::to_string(j) + " is empty");
        std::sort(g.begin(), g.end());
        if (std::adjacent_find(g.begin(), g.end()) != g.end())
            throw ShapeError("generator " + std::to_string(j) + " repeats a qubit index");
        if (g.back() >= n_qubits)
            throw ShapeError("generator " + std::to_string(j) + " has qubit index " + std::to_string(g.back()) +
                             " >= n_qubits " + std::to_string(n_qubits));
        if (!seen.insert(g).second) throw ShapeError("generator " + std::to_string(j) + " duplicates an earlier one");
        for (auto q : g) ++degree[q];
        indices_.insert(indices_.end(), g.begin(), g.end());
        offsets_.push_back(indices_.size());
    }
    inc_offsets_.assign(n_qubits + 1, 0);
    for (std::size_t q = 0; q < n_qubits; ++q) inc_offsets_[q + 1] = inc_offsets_[q] + degree[q];
    incidence_.resize(indices_.size());
    std::vector<std::size_t> cursor(inc_offsets_.begin(), inc_offsets_.end() - 1);
    for (std::size_t j = 0; j < size(); ++j)
        for (auto q : generator(j)) incidence_[cursor[q]++] = static_cast<std::uint32_t>(j);
}

std::vector<Word> GateSet::mask(std::size_t j) const {
    std::vector<Word> m(words_for_bits(n_qubits_), 0);
    for (auto q : generator(j)) m[q / kWordBits] |= Word{1} << (q % kWordBits);
    return m;
}

std::uint64_t GateSet::small_mask(std::size_t j) const {
    if (n_qubits_ > 64) throw LimitError("small_mask requires n_qubits <= 64");
    std::uint64_t m = 0;
    for (auto q : generator(j)) m |= std::uint64_t{1} << q;
    return m;
}

std::vector<std::vector<std::uint32_t>> GateSet::generators() const {
    std::vector<std::vector<std::uint32_t>> out;
    out.reserve(size());
    for (std::size_t j = 0; j < size(); ++j) {
        auto g = generator(j);
        out.emplace_back(g.begin(), g.end());
    }
    return out;
}

void GateSet::anticommuting(std::span<const std::uint32_t> observable_bits, std::vector<std::uint8_t>& scratch,
                            std::vector<std::uint32_t>& out) const {
    out.clear();
    // Toggle a flag per incidence; gates touched an odd number of times survive.
    for (auto q : observable_bits) {
        for (auto j : gates_on(q)) {
            if (scratch[j] == 0) out.push_back(j);
            scratch[j] ^= 2;
            scratch[j] |= 1;
        }
    }
    std::size_t keep = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto j = out[i];
        if (scratch[j] & 2) out[keep++] = j;
        scratch[j] = 0;
    }
    out.resize(keep);
    std::sort(out.begin(), out.end());
}

ParamVector::ParamVector(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t j = 0; j < values_.size(); ++j)
        if (!std::isfinite(values_[j])) throw NumericError("parameter " + std::to_string(j) + " is not finite");
}

void check_bound(const GateSet& gates, const ParamVector& params) {
    if (gates.size() != params.size())
        throw ShapeError("parameter count " + std::to_string(params.size()) + " does not match generator count " +
                         std::to_string(gates.size()));
}

}  // namespace iqp
