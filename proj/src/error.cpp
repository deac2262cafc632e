#include "nsir/error.hpp"

namespace nsir {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::EmptyFormula: return "EmptyFormula";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::NoFormulaFound: return "NoFormulaFound";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::TokenLimitExceeded: return "TokenLimitExceeded";
    case ErrorCode::CacheMiss: return "CacheMiss";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroNormRow: return "ZeroNormRow";
    case ErrorCode::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::DegenerateFusion: return "DegenerateFusion";
    case ErrorCode::NonFiniteLogit: return "NonFiniteLogit";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::EmptyGeneration: return "EmptyGeneration";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::QueryTranslationFailure: return "QueryTranslationFailure";
    case ErrorCode::UnknownDocument: return "UnknownDocument";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::MalformedRun: return "MalformedRun";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Config:
      return 1;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::TokenLimitExceeded:
    case ErrorCode::EndpointError:
    case ErrorCode::RateLimited:
      return 3;
    default:
      return 2;
  }
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(detail) {}

}  // namespace nsir
