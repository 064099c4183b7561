#include "umot/error.hpp"

namespace umot {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NonPositiveDiffusion: return "NonPositiveDiffusion";
    case ErrorCode::NegativeAbsorption: return "NegativeAbsorption";
    case ErrorCode::SolverDivergence: return "SolverDivergence";
    case ErrorCode::NotUnitVector: return "NotUnitVector";
    case ErrorCode::DegenerateNode: return "DegenerateNode";
    case ErrorCode::AllNodesDegenerate: return "AllNodesDegenerate";
    case ErrorCode::DirectionsNotCertified: return "DirectionsNotCertified";
    case ErrorCode::TooFewSolutions: return "TooFewSolutions";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ZeroAbsorption: return "ZeroAbsorption";
    case ErrorCode::NonPositiveSolution: return "NonPositiveSolution";
    case ErrorCode::ZeroEta: return "ZeroEta";
    case ErrorCode::NotElliptic: return "NotElliptic";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::BumpTouchesBoundary: return "BumpTouchesBoundary";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace umot
