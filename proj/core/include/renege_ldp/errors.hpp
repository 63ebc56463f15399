#pragma once

#include <stdexcept>
#include <string>

namespace renege_ldp {

enum class ErrorCode {
  RateNonpositive,
  LambdaLessThanMu,
  ManyServerX0TooSmall,
  HorizonNonpositive,
  NegativeArgument,
  BoundaryInfeasible,
  GridTooCoarse,
  NegativeStart,
  GammaNonpositive,
  BracketingFailed,
  OptimalityViolated,
  HorizonTooShort,
  NotConverged,
  ControlNotPositive,
  ConfigInvalid,
  NumericsFailed,
};

const char* to_string(ErrorCode c);

// exit status the CLI maps an error code to: 2 = invalid configuration or
// inputs, 3 = numerics failure
int exit_status(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace renege_ldp
