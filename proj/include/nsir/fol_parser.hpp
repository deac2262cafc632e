#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace nsir::fol {

enum class TokenClass { Negation, BinaryConnective, Quantifier, Predicate, Term, Punctuation };

std::string_view to_string(TokenClass c);

struct FolToken {
  std::string surface;  // canonical form: ASCII aliases rewritten to ¬ ∧ ∨ → ↔ ⊕ ∀ ∃
  TokenClass kind;
  std::size_t begin;  // byte offsets into the source, half-open
  std::size_t end;
};

struct FolTokenSeq {
  std::string source;
  std::vector<FolToken> tokens;

  std::string_view raw(const FolToken& t) const {
    return std::string_view(source).substr(t.begin, t.end - t.begin);
  }
};

/// Members of the connective set {¬, →, ↔, ∧, ∨, ⊕}. Quantifiers are not.
inline bool is_connective(const FolToken& t) {
  return t.kind == TokenClass::Negation || t.kind == TokenClass::BinaryConnective;
}

/// Lexes one or more formulas (newline separated is fine). Throws
/// EmptyFormula for blank input and UnknownSymbol (detail = byte offset) for
/// bytes outside the alphabet.
FolTokenSeq tokenize_fol(std::string_view formula);

/// Rewrites every aliased token to its canonical surface and keeps the
/// original whitespace between tokens.
std::string normalize_fol(std::string_view formula);

/// Pulls formulas out of a translator reply: the `FORMULA ::: explanation`
/// lines following the last `Conclusion:` header, explanation stripped.
std::vector<std::string> extract_fol_from_llm_response(std::string_view response);

/// Newline-joins formulas into one FOL text. Throws EmptyList.
std::string join_formulas(const std::vector<std::string>& formulas);

}  // namespace nsir::fol
