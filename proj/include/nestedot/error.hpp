#pragma once

#include <stdexcept>
#include <string>

namespace nestedot {

/// Raised when an input object violates its invariants (bad tree, bad plan,
/// mismatched depths, ...). The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when an instance exceeds a solver's size guard.
class TooLargeError : public ValidationError {
public:
    explicit TooLargeError(const std::string& what) : ValidationError(what) {}
};

/// Raised by the CLI when the brute-force cross-check disagrees with the
/// recursive solver. Exit code 3.
class OracleMismatch : public std::runtime_error {
public:
    explicit OracleMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical solver failure (iteration cap, infeasible LP that should be feasible).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nestedot
