#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace concert {

// Base of every error the library raises. Callers that only need a message
// can catch std::runtime_error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter is outside its domain (probability not in (0,1), negative
// diameter, empty sample set, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// The input is well formed but the requested quantity does not exist, e.g.
// the separability coefficient of a constant function.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// The acceptance interval of a test is empty. `deficit` is how much the gap
// a - a' falls short of the sum of radii. For sample-mean tests the smallest
// sample size restoring feasibility is attached when one exists.
class Infeasible : public Error {
 public:
  Infeasible(const std::string& what, double deficit,
             std::optional<long long> minimal_n = std::nullopt)
      : Error(what), deficit_(deficit), minimal_n_(minimal_n) {}

  double deficit() const noexcept { return deficit_; }
  std::optional<long long> minimal_n() const noexcept { return minimal_n_; }

 private:
  double deficit_;
  std::optional<long long> minimal_n_;
};

// The acceptance point chosen by a policy lies outside the feasible interval.
class InvalidPolicy : public Error {
 public:
  using Error::Error;
};

// A caller-supplied function broke a documented contract (monotonicity).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A brute-force computation would exceed its configured budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 1-based data row and the column name
// when the problem is tied to a cell.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0,
             std::string column = {})
      : Error(what), row_(row), column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace concert
