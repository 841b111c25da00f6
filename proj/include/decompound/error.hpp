#pragma once

#include <stdexcept>
#include <string>

namespace decompound {

/// Argument outside an operation's domain (bad index, wrong space, m = 0, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration, law or space specification string.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical precondition not met (non-summable tail, insufficient coverage).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace decompound
