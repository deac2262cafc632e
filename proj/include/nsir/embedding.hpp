#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nsir/digest.hpp"
#include "nsir/linalg.hpp"

namespace nsir {

enum class Side : std::uint8_t { NL = 0, FOL = 1 };

std::string_view to_string(Side side);

/// Rows are per-token embeddings (m x d).
using TokenMatrix = Matrix;

/// One text as seen by the encoder: whole-sequence CLS vector plus one pooled
/// row per word (NL) or per lexical FOL token (FOL).
struct EncodedText {
  Sha256 text_hash{};
  std::vector<std::string> surface_tokens;
  TokenMatrix token_matrix;
  Vector cls;

  std::size_t dim() const noexcept { return cls.size(); }
};

/// Throws ShapeMismatch / DimensionMismatch / NumericalFailure when the
/// invariants of EncodedText do not hold.
void validate(const EncodedText& e);

/// SHA-256 over a one-byte side prefix (0x00 NL, 0x01 FOL) followed by the
/// UTF-8 text. Keys both the binary store and EncodedText::text_hash.
Sha256 text_key(std::string_view text, Side side);

struct Segment {
  std::string surface;
  std::size_t begin;
  std::size_t end;
};

/// Word segmentation used for pooling. NL: maximal runs of ASCII
/// alphanumerics, '_' and non-ASCII bytes; everything else separates and is
/// dropped. FOL: the fol-parser tokens with canonical surfaces.
std::vector<Segment> segment_text(std::string_view text, Side side);

/// Mean-pools backend subword vectors into segment rows. Subword surfaces
/// are matched against the text left to right (case-insensitive, WordPiece
/// "##" and SentencePiece/BPE space markers stripped); special tokens such
/// as [CLS] are skipped and unmatched ones such as [UNK] are attributed to
/// the word under the cursor.
///
/// Throws TokenLimitExceeded (detail = words covered) when a suffix of the
/// words received no subwords, ProviderUnavailable when an inner word did.
EncodedText pool_subwords(std::string_view text, Side side, Vector cls,
                          const std::vector<std::string>& subword_tokens,
                          const Matrix& subword_vectors);

/// Uniform contract over the file store and the HTTP service.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual EncodedText encode(std::string_view text, Side side) = 0;

  /// Order-preserving. The default maps encode(); a failure is rethrown with
  /// its original code and the failing index as detail.
  virtual std::vector<EncodedText> batch_encode(const std::vector<std::string>& texts, Side side);
};

}  // namespace nsir
