#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blockstep {

enum class ErrorCode {
  BadShape,
  RankDeficient,
  NotSymmetric,
  Singular,
  BadStepsize,
  OutOfRange,
  BadSpectrum,
  TooFew,
  NotBWO,
  NotOrthonormal,
  InsufficientTail,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

// All precondition failures in the library surface as this exception.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace blockstep
