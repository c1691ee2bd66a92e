#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ggm {

// Failure category. The CLI maps these onto exit codes: validation-style
// categories exit with 2, numerical ones with 3.
enum class ErrorKind {
  InvalidArgument,
  NotPositiveDefinite,
  InsufficientData,
  ColumnSingular,
  DegenerateEstimate,
  SingularDesign,
  Parse,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_numerical() const noexcept {
    switch (kind_) {
      case ErrorKind::NotPositiveDefinite:
      case ErrorKind::InsufficientData:
      case ErrorKind::ColumnSingular:
      case ErrorKind::DegenerateEstimate:
      case ErrorKind::SingularDesign:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::InvalidArgument, what) {}
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, double min_eigenvalue)
      : Error(ErrorKind::NotPositiveDefinite, what),
        min_eigenvalue_(min_eigenvalue) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// Raised for a column whose support is too large for the sample, or n < 2.
class InsufficientData : public Error {
 public:
  InsufficientData(const std::string& what, std::ptrdiff_t column = -1)
      : Error(ErrorKind::InsufficientData, what), column_(column) {}

  std::ptrdiff_t column() const noexcept { return column_; }

 private:
  std::ptrdiff_t column_;
};

class ColumnSingular : public Error {
 public:
  ColumnSingular(const std::string& what, std::ptrdiff_t column,
                 double condition)
      : Error(ErrorKind::ColumnSingular, what),
        column_(column),
        condition_(condition) {}

  std::ptrdiff_t column() const noexcept { return column_; }
  double condition_estimate() const noexcept { return condition_; }

 private:
  std::ptrdiff_t column_;
  double condition_;
};

class DegenerateEstimate : public Error {
 public:
  explicit DegenerateEstimate(const std::string& what)
      : Error(ErrorKind::DegenerateEstimate, what) {}
};

class SingularDesign : public Error {
 public:
  explicit SingularDesign(const std::string& what)
      : Error(ErrorKind::SingularDesign, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(ErrorKind::Parse,
              line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

}  // namespace ggm
