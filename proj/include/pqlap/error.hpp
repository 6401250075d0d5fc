#pragma once

#include <stdexcept>
#include <string>

namespace pqlap {

enum class ErrorCode {
  DOMAIN_ERROR,
  CROSS_CHECK_FAILED,
  ZERO_FUNCTION,
  SIGN_ERROR,
  PART_SIGN_ERROR,
  NO_FEASIBLE_SEED,
  NOT_CONVERGED,
  NO_POSITIVE_SOLUTION,
  BISECTION_EXHAUSTED,
  PATH_NOT_NEGATIVE,
  SUPER_SOLUTION_VIOLATION,
  USAGE,
  IO_ERROR,
};

inline const char* code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DOMAIN_ERROR: return "DOMAIN_ERROR";
    case ErrorCode::CROSS_CHECK_FAILED: return "CROSS_CHECK_FAILED";
    case ErrorCode::ZERO_FUNCTION: return "ZERO_FUNCTION";
    case ErrorCode::SIGN_ERROR: return "SIGN_ERROR";
    case ErrorCode::PART_SIGN_ERROR: return "PART_SIGN_ERROR";
    case ErrorCode::NO_FEASIBLE_SEED: return "NO_FEASIBLE_SEED";
    case ErrorCode::NOT_CONVERGED: return "NOT_CONVERGED";
    case ErrorCode::NO_POSITIVE_SOLUTION: return "NO_POSITIVE_SOLUTION";
    case ErrorCode::BISECTION_EXHAUSTED: return "BISECTION_EXHAUSTED";
    case ErrorCode::PATH_NOT_NEGATIVE: return "PATH_NOT_NEGATIVE";
    case ErrorCode::SUPER_SOLUTION_VIOLATION: return "SUPER_SOLUTION_VIOLATION";
    case ErrorCode::USAGE: return "USAGE";
    case ErrorCode::IO_ERROR: return "IO_ERROR";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(code_name(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Outcome of a solver run that still hands back its best iterate on failure.
struct Status {
  bool ok = true;
  ErrorCode code = ErrorCode::NOT_CONVERGED;
  std::string detail;

  static Status success() { return {}; }
  static Status failure(ErrorCode c, std::string d) { return {false, c, std::move(d)}; }
  std::string message() const { return ok ? std::string("OK") : std::string(code_name(code)) + ": " + detail; }
};

inline void require(bool cond, ErrorCode code, const std::string& detail) {
  if (!cond) throw Error(code, detail);
}

inline void require_exponent(double r, const char* name = "r") {
  if (!(r > 1.0)) throw Error(ErrorCode::DOMAIN_ERROR, std::string(name) + " must satisfy " + name + " > 1");
}

}  // namespace pqlap
