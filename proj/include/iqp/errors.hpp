#pragma once

#include <stdexcept>
#include <string>

namespace iqp {

/// Bit widths or vector lengths that do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Request beyond the exact-simulation qubit limit.
class LimitError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed dataset, checkpoint or spec file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite value produced or supplied where a finite one is required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace iqp
