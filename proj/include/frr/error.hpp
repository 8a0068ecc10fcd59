#pragma once

#include <stdexcept>
#include <string>

namespace frr {

/// Failure categories shared by every module. The numeric values are the
/// status codes reported through the C API.
enum class ErrorKind : int {
  Validation = 1,    ///< malformed input or violated precondition
  Domain = 2,        ///< argument outside the function's domain
  Conditioning = 3,  ///< numerically singular system
  Degenerate = 4,    ///< degenerate smoother / degrees of freedom
  Selection = 5,     ///< no admissible tuning parameter
  Io = 6,            ///< file or parse failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// Raised when Z'Z + P cannot be factored. `pivot` holds the smallest
/// diagonal pivot of an LDL' factorization of the offending matrix.
struct ConditioningError : Error {
  ConditioningError(const std::string& what, double pivot)
      : Error(ErrorKind::Conditioning, what), pivot(pivot) {}
  double pivot;
};

struct DegenerateError : Error {
  explicit DegenerateError(const std::string& what) : Error(ErrorKind::Degenerate, what) {}
};

struct SelectionError : Error {
  explicit SelectionError(const std::string& what) : Error(ErrorKind::Selection, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace frr
