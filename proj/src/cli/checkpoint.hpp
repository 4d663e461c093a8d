#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "iqp/circuit.hpp"

namespace iqp::cli {

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    std::vector<double> sigmas;
    std::string bandwidth_rule;
};

/// Text hand-off format:
///   iqpmmd-checkpoint <version>
///   n_qubits <n>
///   kind <iqp|bitflip|iqp-symmetrized>
///   generators <m>     then m lines of sorted qubit indices
///   params <m>         then m lines, 17 significant digits
///   provenance         then key/value lines
///   end
struct Checkpoint {
    GateSet gates;
    ParamVector params;
    ModelKind kind = ModelKind::IQP;
    Provenance provenance;
};

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// "%.17g", which round-trips every finite double.
std::string format_double(double v);

}  // namespace iqp::cli
