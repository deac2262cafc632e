#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "nsir/embedding.hpp"
#include "nsir/linalg.hpp"

namespace nsir::ot {

/// Entries of a plan below this are treated as "not aligned".
inline constexpr double kZeroThreshold = 1e-9;
inline constexpr double kMarginalTolerance = 1e-12;

/// Balanced transport problem: cost is m x n, source sums to 1 over rows,
/// target sums to 1 over columns.
struct TransportProblem {
  Matrix cost;
  Vector source;
  Vector target;
};

struct AlignmentPlan {
  Matrix plan;
  double objective = 0.0;
  std::vector<std::uint8_t> zero_mask;  // row-major, 1 where plan < kZeroThreshold

  bool is_zero(std::size_t i, std::size_t j) const { return zero_mask[i * plan.cols() + j] != 0; }
  std::size_t nonzero_count() const;
};

/// Cosine distance C_ij = 1 - <h_i, z_j> / (|h_i| |z_j|), clamped to [0, 2].
/// Throws ZeroNormRow (detail = row; message names the side) and
/// DimensionMismatch.
Matrix build_cost_matrix(const TokenMatrix& nl, const TokenMatrix& fol);

/// a_i = 1/m, b_j = 1/n.
std::pair<Vector, Vector> uniform_marginals(std::size_t m, std::size_t n);

/// Throws InvalidArgument / InfeasibleMarginals when the problem is malformed.
void validate(const TransportProblem& problem);

/// Exact vertex solution by the transportation simplex. The starting basis
/// is the least-cost rule; pivots follow Bland's rule (lowest row-major
/// index enters, lowest index among tied minimum ratios leaves) so equal-cost
/// optima resolve the same way every run. Throws NumericalFailure if the
/// iteration guard trips.
AlignmentPlan solve_ot(const TransportProblem& problem);

}  // namespace nsir::ot
