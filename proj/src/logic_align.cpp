#include "nsir/logic_align.hpp"

#include <string>

#include "nsir/error.hpp"

namespace nsir {

FusedVector fuse_cls(const TokenMatrix& nl, const Matrix& plan, const TokenMatrix& fol,
                     std::span<const double> cls, bool normalize) {
  const std::size_t m = nl.rows();
  const std::size_t n = fol.rows();
  const std::size_t d = cls.size();
  if (nl.cols() != d || fol.cols() != d || plan.rows() != m || plan.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "fusion shapes H " + std::to_string(m) + "x" + std::to_string(nl.cols()) + ", P " +
                    std::to_string(plan.rows()) + "x" + std::to_string(plan.cols()) + ", Z " +
                    std::to_string(n) + "x" + std::to_string(fol.cols()) + ", cls " +
                    std::to_string(d));
  }
  if (!all_finite(cls)) throw Error(ErrorCode::InvalidArgument, "non-finite CLS vector");

  Vector z_cls(n);
  for (std::size_t j = 0; j < n; ++j) z_cls[j] = dot(fol.row(j), cls);

  Vector pz(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += plan(i, j) * z_cls[j];
    pz[i] = s;
  }

  FusedVector out;
  out.vector.assign(d, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto h = nl.row(i);
    for (std::size_t c = 0; c < d; ++c) out.vector[c] += h[c] * pz[i];
  }

  if (!(l2_norm(out.vector) >= kMinFusedNorm)) {
    throw Error(ErrorCode::DegenerateFusion, "fused CLS vector vanished");
  }
  if (normalize) {
    out.vector = normalized(out.vector, kMinFusedNorm);
    out.was_normalized = true;
  }
  return out;
}

double score1(const FusedVector& query, const FusedVector& doc) {
  return dot(query.vector, doc.vector);
}

}  // namespace nsir
