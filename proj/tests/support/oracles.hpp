#pragma once

// Independent reference implementations used only by tests. They trade
// speed for transparency and share no code with the library's algorithms.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "nsir/linalg.hpp"

namespace nsir::oracle {

struct OtOracleResult {
  double objective;
  Matrix plan;
  std::size_t vertices_seen;  // feasible spanning-tree bases visited
};

/// Minimum of <C, P> over every basic feasible solution: enumerates all
/// spanning trees of the complete bipartite graph on rows and columns,
/// solves each tree's flows by leaf elimination and keeps the feasible
/// ones. Exponential; meant for m, n <= 5.
OtOracleResult brute_force_ot(const Matrix& cost, const Vector& a, const Vector& b);

/// Same problem as a dense LP: two-phase tableau simplex with Bland's rule
/// over all m*n variables. Polynomial in practice; used where spanning-tree
/// enumeration would blow up.
OtOracleResult tableau_ot(const Matrix& cost, const Vector& a, const Vector& b);

/// Materializes H^T P (d x n), then (H^T P) Z (d x d), then multiplies cls.
Vector naive_four_factor(const Matrix& H, const Matrix& P, const Matrix& Z, const Vector& cls);

struct NaiveAttention {
  Matrix weights;     // n x m
  Matrix contextual;  // n x d
  Vector pooled;
};

/// Plain softmax(Z H^T / sqrt(d_k)) H, no max shift.
NaiveAttention naive_cross_attention(const Matrix& H, const Matrix& Z, double d_k);

/// Same with explicit per-pair values h_i + s_ji z_j; `sigma` is n x m.
NaiveAttention naive_signed_attention(const Matrix& H, const Matrix& Z, const std::vector<std::vector<int>>& sigma,
                                      double d_k);

/// One side of the reranker rebuilt from the pieces above: cosine-distance
/// cost, tableau_ot plan under uniform marginals, four-factor fusion and
/// signed attention with d_k = d. `connective` tags FOL rows with +1
/// (binary connective), -1 (negation) or 0; `use_sigma` = false zeroes it.
struct OracleSide {
  Matrix plan;
  Vector fused;   // unit length
  Vector pooled;  // unit length
};
OracleSide oracle_side(const Matrix& H, const Matrix& Z, const Vector& cls, const std::vector<int>& connective,
                       bool use_sigma = true);

/// Ranked doc ids per query and graded judgments.
using RankedLists = std::map<std::string, std::vector<std::string>>;
using Judgments = std::map<std::string, std::map<std::string, int>>;

/// Scored query set = union of both maps' keys; zero-relevant queries give 0.
std::map<std::string, double> brute_ndcg(const RankedLists& run, const Judgments& qrels, std::size_t k);
std::map<std::string, double> brute_ap(const RankedLists& run, const Judgments& qrels);

}  // namespace nsir::oracle
