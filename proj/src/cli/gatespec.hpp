#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "iqp/circuit.hpp"

namespace iqp::cli {

/// Every subset of size 1..k.
GateSet all_k_local(std::size_t n, std::size_t k);

/// All pairs, optionally preceded by the n single-qubit gates.
GateSet two_local_all_to_all(std::size_t n, bool with_singles);

/// Single-qubit gates plus a two-qubit gate per graph edge, and per pair at
/// graph distance two when next_nearest is set.
GateSet graph_adjacent(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                       bool next_nearest);

/// Edge list file: one "i j" (optionally "i j w") per line; '#' starts a comment.
std::vector<std::pair<std::uint32_t, std::uint32_t>> read_edge_file(const std::string& path);

/// Gate file: one generator per line as whitespace-separated qubit indices.
std::vector<std::vector<std::uint32_t>> read_gate_file(const std::string& path);

GateSet build_gates(const GateSpecConfig& spec, std::size_t n);

}  // namespace iqp::cli
