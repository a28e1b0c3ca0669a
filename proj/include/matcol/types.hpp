#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace matcol {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Invalid configuration or inconsistent inputs (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input carries no usable signal: zero matrix, zero vector, empty column
// sample (CLI exit code 3).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A per-column normal-equation system is numerically singular and no
// regularization was requested. `column` is the source column index when
// known, -1 otherwise (CLI exit code 3).
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, Index column, double min_eigenvalue)
      : std::runtime_error(what), column(column), min_eigenvalue(min_eigenvalue) {}

  Index column;
  double min_eigenvalue;
};

// Malformed input file; carries the 1-based position of the first failure.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line(line), column(column) {}

  std::size_t line;
  std::size_t column;
};

// Writes a warning line to stderr. Thread safe.
void warn(const std::string& message);

// Throws ConfigError if any entry of `m` is NaN or infinite.
void require_finite(const Matrix& m, const std::string& what);
void require_finite(const Vector& v, const std::string& what);

}  // namespace matcol
