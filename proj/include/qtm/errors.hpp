// errors.hpp - Exception types shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace qtm {

// Input outside the domain an operation is defined on.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A solve, decomposition or search that did not meet its tolerance.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qtm
