#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace umot {

enum class ErrorCode {
  InvalidArgument,
  GridMismatch,
  NonFiniteValue,
  NonPositiveDiffusion,
  NegativeAbsorption,
  SolverDivergence,
  NotUnitVector,
  DegenerateNode,
  AllNodesDegenerate,
  DirectionsNotCertified,
  TooFewSolutions,
  RankDeficient,
  ZeroAbsorption,
  NonPositiveSolution,
  ZeroEta,
  NotElliptic,
  Diverged,
  InsufficientHistory,
  InsufficientData,
  BumpTouchesBoundary,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can dispatch on the failure kind instead of the text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace umot
