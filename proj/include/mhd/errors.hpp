#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mhd {

/// Bad caller input (empty lists, nonpositive sizes, role mismatches).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed mesh file. Carries the 1-based line number of the failure.
class MeshFormatError : public std::runtime_error {
 public:
  MeshFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Mesh that parses but violates a topological or geometric invariant.
class MeshInvalidError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent run configuration (unknown boundary tag, missing data).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse factorization or solve failure.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity that is positive by construction came out otherwise. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mhd
