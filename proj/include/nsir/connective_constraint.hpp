#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nsir/fol_parser.hpp"
#include "nsir/linalg.hpp"
#include "nsir/ot_align.hpp"

namespace nsir {

/// n x m over {-1, 0, +1}; row j is a FOL token, column i an NL token.
class SigmaMatrix {
 public:
  SigmaMatrix() = default;
  SigmaMatrix(std::size_t fol_tokens, std::size_t nl_tokens)
      : n_(fol_tokens), m_(nl_tokens), values_(fol_tokens * nl_tokens, 0) {}

  std::size_t fol_tokens() const noexcept { return n_; }
  std::size_t nl_tokens() const noexcept { return m_; }
  std::int8_t operator()(std::size_t j, std::size_t i) const { return values_[j * m_ + i]; }
  std::int8_t& operator()(std::size_t j, std::size_t i) { return values_[j * m_ + i]; }
  bool all_zero() const;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<std::int8_t> values_;
};

/// sigma_ji = +1 for an unaligned binary connective, -1 for an unaligned
/// negation, 0 otherwise. "Unaligned" reads the plan as P_ij with i the NL
/// row and j the FOL column. Throws ShapeMismatch when the plan's column
/// count differs from the token count.
SigmaMatrix assign_sigma(const fol::FolTokenSeq& fol, const ot::AlignmentPlan& plan);

/// Single-cell form of the rule above.
std::int8_t sigma_for(const fol::FolToken& token, bool unaligned);

struct AttentionResult {
  Matrix weights;     // n x m, rows are distributions over NL tokens
  Matrix contextual;  // n x d
  Vector pooled;      // mean of contextual rows
  double d_k = 0.0;
};

/// FOL tokens attend over NL tokens with values h_i + sigma_ji z_j and
/// logits z_j . (h_i + sigma_ji z_j) / sqrt(d_k). Throws ShapeMismatch,
/// InvalidArgument (d_k <= 0) and NonFiniteLogit.
AttentionResult attend(const TokenMatrix& nl, const TokenMatrix& fol, const SigmaMatrix& sigma,
                       double d_k);

/// Inner product of pooled vectors; callers normalize first.
double score2(std::span<const double> query_pooled, std::span<const double> doc_pooled);

}  // namespace nsir
