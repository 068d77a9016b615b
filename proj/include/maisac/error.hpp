// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace maisac {

/// Failure categories. Each maps to a distinct CLI exit code.
enum class ErrorKind {
  kInvalidArgument = 2,
  kConfig = 3,
  kInfeasibleLayout = 4,
  kNumericalConditioning = 5,
  kSolverStalled = 6,
  kComplexityGuard = 7,
  kResourceGuard = 8,
  kIo = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kConfig: return "config-error";
    case ErrorKind::kInfeasibleLayout: return "infeasible-layout";
    case ErrorKind::kNumericalConditioning: return "numerical-conditioning";
    case ErrorKind::kSolverStalled: return "solver-stalled";
    case ErrorKind::kComplexityGuard: return "complexity-guard";
    case ErrorKind::kResourceGuard: return "resource-guard";
    case ErrorKind::kIo: return "io-error";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::kInvalidArgument, what);
}

}  // namespace maisac
