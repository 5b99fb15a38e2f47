#include "strapsim/error.hpp"

namespace strapsim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownConstituent: return "UnknownConstituent";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateUnion: return "DegenerateUnion";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NonPositiveColumnMax: return "NonPositiveColumnMax";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnknownDocument: return "UnknownDocument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::TargetMissing: return "TargetMissing";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroTruthForMape: return "ZeroTruthForMape";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::MissingReturns: return "MissingReturns";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateHolding: return "DuplicateHolding";
    case ErrorCode::NotSquareWhenSelfMode: return "NotSquareWhenSelfMode";
    case ErrorCode::AsymmetryBeyondTolerance: return "AsymmetryBeyondTolerance";
    case ErrorCode::DuplicatePeriod: return "DuplicatePeriod";
    case ErrorCode::BadPeriodFormat: return "BadPeriodFormat";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Internal:
    case ErrorCode::TooLarge:
      return false;
    default:
      return true;
  }
}

}  // namespace strapsim
