#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strapsim {

enum class ErrorCode {
  EmptySet,
  NegativeWeight,
  DuplicateId,
  UnknownConstituent,
  DimensionMismatch,
  DegenerateUnion,
  TooLarge,
  NonPositiveColumnMax,
  TooFewRows,
  EmptyCorpus,
  UnknownDocument,
  ZeroVector,
  TargetMissing,
  InsufficientRows,
  SchemaMismatch,
  EmptyPool,
  LengthMismatch,
  ZeroTruthForMape,
  TooShort,
  ConstantInput,
  MissingReturns,
  ParseError,
  DuplicateHolding,
  NotSquareWhenSelfMode,
  AsymmetryBeyondTolerance,
  DuplicatePeriod,
  BadPeriodFormat,
  InvalidArgument,
  Io,
  Internal,
};

std::string_view to_string(ErrorCode code) noexcept;

// Input/validation errors map to CLI exit code 2; everything else is 1.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace strapsim
