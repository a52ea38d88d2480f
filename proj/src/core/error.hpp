#pragma once

#include <stdexcept>
#include <string>

namespace berkson {

// Bad arguments, malformed input files, unknown configuration keys.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Singular systems, infeasible starting points, NaN objectives.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace berkson
