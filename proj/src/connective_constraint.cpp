#include "nsir/connective_constraint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsir/error.hpp"

namespace nsir {

bool SigmaMatrix::all_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](std::int8_t v) { return v == 0; });
}

std::int8_t sigma_for(const fol::FolToken& token, bool unaligned) {
  if (!unaligned) return 0;
  switch (token.kind) {
    case fol::TokenClass::Negation:
      return -1;
    case fol::TokenClass::BinaryConnective:
      return 1;
    default:
      return 0;
  }
}

SigmaMatrix assign_sigma(const fol::FolTokenSeq& fol, const ot::AlignmentPlan& plan) {
  const std::size_t n = fol.tokens.size();
  const std::size_t m = plan.plan.rows();
  if (plan.plan.cols() != n || plan.zero_mask.size() != m * n) {
    throw Error(ErrorCode::ShapeMismatch, "plan has " + std::to_string(plan.plan.cols()) +
                                              " FOL columns but the formula has " +
                                              std::to_string(n) + " tokens");
  }
  SigmaMatrix sigma(n, m);
  for (std::size_t j = 0; j < n; ++j) {
    if (!fol::is_connective(fol.tokens[j])) continue;
    for (std::size_t i = 0; i < m; ++i) sigma(j, i) = sigma_for(fol.tokens[j], plan.is_zero(i, j));
  }
  return sigma;
}

AttentionResult attend(const TokenMatrix& nl, const TokenMatrix& fol, const SigmaMatrix& sigma,
                       double d_k) {
  const std::size_t m = nl.rows();
  const std::size_t n = fol.rows();
  const std::size_t d = nl.cols();
  if (m == 0 || n == 0 || fol.cols() != d || sigma.fol_tokens() != n || sigma.nl_tokens() != m) {
    throw Error(ErrorCode::ShapeMismatch, "attention shapes H " + std::to_string(m) + "x" +
                                              std::to_string(d) + ", Z " + std::to_string(n) + "x" +
                                              std::to_string(fol.cols()) + ", sigma " +
                                              std::to_string(sigma.fol_tokens()) + "x" +
                                              std::to_string(sigma.nl_tokens()));
  }
  if (!(d_k > 0.0) || !std::isfinite(d_k)) throw Error(ErrorCode::InvalidArgument, "d_k must be positive");

  const double scale = 1.0 / std::sqrt(d_k);
  AttentionResult out{Matrix(n, m), Matrix(n, d), Vector(d, 0.0), d_k};
  Vector logits(m);
  Vector value(d);

  for (std::size_t j = 0; j < n; ++j) {
    const auto z = fol.row(j);
    // z.(h + s z) = z.h + s |z|^2
    const double zz = dot(z, z);
    for (std::size_t i = 0; i < m; ++i) {
      logits[i] = (dot(z, nl.row(i)) + sigma(j, i) * zz) * scale;
      if (!std::isfinite(logits[i])) {
        throw Error(ErrorCode::NonFiniteLogit, "logit for FOL token " + std::to_string(j) + " is not finite", j);
      }
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      out.weights(j, i) = std::exp(logits[i] - top);
      total += out.weights(j, i);
    }
    auto ctx = out.contextual.row(j);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = out.weights(j, i) /= total;
      const auto h = nl.row(i);
      const double s = sigma(j, i);
      for (std::size_t c = 0; c < d; ++c) ctx[c] += a * (h[c] + s * z[c]);
    }
    for (std::size_t c = 0; c < d; ++c) out.pooled[c] += ctx[c];
  }
  for (double& v : out.pooled) v /= static_cast<double>(n);
  return out;
}

double score2(std::span<const double> query_pooled, std::span<const double> doc_pooled) {
  return dot(query_pooled, doc_pooled);
}

}  // namespace nsir
