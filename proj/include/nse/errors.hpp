#pragma once

#include <stdexcept>
#include <string>

namespace nse {

// Error categories map onto the CLI exit codes (2 validation, 3 numerical, 4 io).
enum class ErrorKind { validation = 2, numerical = 3, io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(ErrorKind::validation, msg) {}
};

struct CapabilityError : Error {
  explicit CapabilityError(const std::string& msg) : Error(ErrorKind::validation, msg) {}
};

struct BracketingError : Error {
  explicit BracketingError(const std::string& msg) : Error(ErrorKind::numerical, msg) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(ErrorKind::numerical, msg) {}
};

// Carries the best estimate when adaptive integration fails to converge.
struct AccuracyError : Error {
  AccuracyError(const std::string& msg, double estimate, double error_bound)
      : Error(ErrorKind::numerical, msg), estimate(estimate), error_bound(error_bound) {}
  double estimate;
  double error_bound;
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorKind::io, msg) {}
};

struct ConstructionError : Error {
  explicit ConstructionError(const std::string& msg) : Error(ErrorKind::numerical, msg) {}
};

}  // namespace nse
