#include "gatespec.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "iqp/errors.hpp"

namespace iqp::cli {

namespace {

void add_subsets(std::size_t n, std::size_t size, std::size_t start, std::vector<std::uint32_t>& cur,
                 std::vector<std::vector<std::uint32_t>>& out) {
    if (cur.size() == size) {
        out.push_back(cur);
        return;
    }
    for (std::size_t q = start; q + (size - cur.size()) <= n; ++q) {
        cur.push_back(static_cast<std::uint32_t>(q));
        add_subsets(n, size, q + 1, cur, out);
        cur.pop_back();
    }
}

std::string strip_comment(const std::string& line) {
    const auto hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

}  // namespace

GateSet all_k_local(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::uint32_t>> gens;
    std::vector<std::uint32_t> cur;
    for (std::size_t size = 1; size <= std::min(k, n); ++size) add_subsets(n, size, 0, cur, gens);
    return GateSet(n, gens);
}

GateSet two_local_all_to_all(std::size_t n, bool with_singles) {
    std::vector<std::vector<std::uint32_t>> gens;
    gens.reserve(n * (n - 1) / 2 + (with_singles ? n : 0));
    if (with_singles)
        for (std::uint32_t i = 0; i < n; ++i) gens.push_back({i});
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) gens.push_back({i, j});
    return GateSet(n, gens);
}

GateSet graph_adjacent(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                       bool next_nearest) {
    std::vector<std::set<std::uint32_t>> adj(n);
    std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (auto [i, j] : edges) {
        if (i >= n || j >= n || i == j) throw FormatError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") is invalid for " + std::to_string(n) + " qubits");
        adj[i].insert(j);
        adj[j].insert(i);
        pairs.insert({std::min(i, j), std::max(i, j)});
    }
    if (next_nearest) {
        for (std::uint32_t v = 0; v < n; ++v)
            for (std::uint32_t a : adj[v])
                for (std::uint32_t b : adj[v])
                    if (a < b) pairs.insert({a, b});
    }
    std::vector<std::vector<std::uint32_t>> gens;
    for (std::uint32_t i = 0; i < n; ++i) gens.push_back({i});
    for (auto [a, b] : pairs) gens.push_back({a, b});
    return GateSet(n, gens);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> read_edge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge file " + path);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream s(strip_comment(line));
        long long i = 0;
        long long j = 0;
        if (!(s >> i)) continue;
        if (!(s >> j) || i < 0 || j < 0) throw FormatError(path + ":" + std::to_string(line_no) + ": expected 'i j'");
        edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
    return edges;
}

std::vector<std::vector<std::uint32_t>> read_gate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gate file " + path);
    std::vector<std::vector<std::uint32_t>> gens;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream s(strip_comment(line));
        std::vector<std::uint32_t> g;
        long long q = 0;
        while (s >> q) {
            if (q < 0) throw FormatError(path + ": negative qubit index");
            g.push_back(static_cast<std::uint32_t>(q));
        }
        if (!s.eof()) throw FormatError(path + ": non-numeric token in gate line");
        if (!g.empty()) gens.push_back(std::move(g));
    }
    return gens;
}

GateSet build_gates(const GateSpecConfig& spec, std::size_t n) {
    if (spec.type == "two-local-all-to-all-plus-singles") return two_local_all_to_all(n, true);
    if (spec.type == "two-local-all-to-all") return two_local_all_to_all(n, false);
    if (spec.type == "all-k-local") return all_k_local(n, spec.k);
    if (spec.type == "graph-adjacent") return graph_adjacent(n, read_edge_file(spec.path), spec.next_nearest);
    if (spec.type == "explicit") return GateSet(n, read_gate_file(spec.path));
    throw ConfigError("unknown gate specification '" + spec.type + "'");
}

}  // namespace iqp::cli
