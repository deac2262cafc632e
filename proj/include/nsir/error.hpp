#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nsir {

enum class ErrorCode {
  // precondition violations and usage errors
  InvalidArgument,
  Config,
  // fol-parser
  EmptyFormula,
  UnknownSymbol,
  NoFormulaFound,
  EmptyList,
  // embedding-provider
  ProviderUnavailable,
  TokenLimitExceeded,
  CacheMiss,
  // linear algebra / ot-align / scoring
  DimensionMismatch,
  ShapeMismatch,
  ZeroNormRow,
  InfeasibleMarginals,
  NumericalFailure,
  DegenerateFusion,
  NonFiniteLogit,
  // translator
  EndpointError,
  RateLimited,
  ParseFailure,
  EmptyGeneration,
  // pipeline
  EmptyIndex,
  QueryTranslationFailure,
  UnknownDocument,
  // data files
  MissingFile,
  MalformedRow,
  MalformedRun,
  SchemaViolation,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Process exit status attached to every error code: 1 = configuration or
/// usage, 2 = data, 3 = backend (embedding service or LLM endpoint).
int exit_code_for(ErrorCode code);

/// The single exception type thrown by the library. `detail` carries the
/// positional payload some codes have (token position, row index, HTTP
/// status, line number, batch index).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> detail = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> detail_;
};

}  // namespace nsir
