#pragma once

#include <stdexcept>
#include <string>

namespace forestseg {

/// Invalid configuration, flags, or arguments (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data that violates a contract: bad labels, shape mismatches,
/// missing files (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values or degenerate numerics during training (CLI exit code 4).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace forestseg
