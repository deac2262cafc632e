#pragma once

#include "nsir/embedding.hpp"
#include "nsir/linalg.hpp"

namespace nsir {

/// CLS vector after fusion with the FOL side.
struct FusedVector {
  Vector vector;
  bool was_normalized = false;
};

/// Minimum pre-normalization norm; below it fusion is DegenerateFusion.
inline constexpr double kMinFusedNorm = 1e-12;

/// H^T * P * Z * cls, evaluated right to left (Z cls, then P (.), then
/// H^T (.)) and L2-normalized unless `normalize` is false.
///
/// H is m x d, P is m x n, Z is n x d, cls has d entries. Throws
/// DimensionMismatch and DegenerateFusion.
FusedVector fuse_cls(const TokenMatrix& nl, const Matrix& plan, const TokenMatrix& fol,
                     std::span<const double> cls, bool normalize = true);

/// Inner product of two fused vectors (a cosine when both are normalized).
double score1(const FusedVector& query, const FusedVector& doc);

}  // namespace nsir
