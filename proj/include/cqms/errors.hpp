// errors.hpp — exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace cqms {

// Malformed or out-of-contract input (bad dimensions, non-Hermitian where
// Hermitian is required, missing files, schema violations).
class input_error : public std::invalid_argument {
public:
    explicit input_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// A validity check on a constructed object failed (Lip-norm axioms, bridge
// conditions, invariant suites).
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed to reach its stated tolerance.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace cqms
