#include "blockstep/error.hpp"

namespace blockstep {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::BadStepsize: return "BadStepsize";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::BadSpectrum: return "BadSpectrum";
    case ErrorCode::TooFew: return "TooFew";
    case ErrorCode::NotBWO: return "NotBWO";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::InsufficientTail: return "InsufficientTail";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace blockstep
