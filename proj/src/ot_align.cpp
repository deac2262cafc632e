#include "nsir/ot_align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "nsir/error.hpp"

namespace nsir::ot {

std::size_t AlignmentPlan::nonzero_count() const {
  return static_cast<std::size_t>(std::count(zero_mask.begin(), zero_mask.end(), std::uint8_t{0}));
}

Matrix build_cost_matrix(const TokenMatrix& nl, const TokenMatrix& fol) {
  if (nl.rows() == 0 || fol.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "cost matrix needs at least one row per side");
  }
  if (nl.cols() != fol.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "NL dimension " + std::to_string(nl.cols()) + " vs FOL dimension " +
                    std::to_string(fol.cols()));
  }
  auto norms = [](const TokenMatrix& t, const char* side) {
    Vector out(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) {
      out[r] = l2_norm(t.row(r));
      if (!(out[r] > 0.0) || !std::isfinite(out[r])) {
        throw Error(ErrorCode::ZeroNormRow,
                    std::string(side) + " row " + std::to_string(r) + " has zero or non-finite norm", r);
      }
    }
    return out;
  };
  const Vector hn = norms(nl, "NL");
  const Vector zn = norms(fol, "FOL");

  Matrix c(nl.rows(), fol.rows());
  for (std::size_t i = 0; i < nl.rows(); ++i) {
    for (std::size_t j = 0; j < fol.rows(); ++j) {
      const double cos = dot(nl.row(i), fol.row(j)) / (hn[i] * zn[j]);
      c(i, j) = std::clamp(1.0 - cos, 0.0, 2.0);
    }
  }
  return c;
}

std::pair<Vector, Vector> uniform_marginals(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw Error(ErrorCode::InvalidArgument, "marginals need m, n >= 1");
  return {Vector(m, 1.0 / static_cast<double>(m)), Vector(n, 1.0 / static_cast<double>(n))};
}

void validate(const TransportProblem& p) {
  const std::size_t m = p.cost.rows();
  const std::size_t n = p.cost.cols();
  if (m == 0 || n == 0) throw Error(ErrorCode::InvalidArgument, "empty cost matrix");
  if (p.source.size() != m || p.target.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "marginal lengths do not match the cost matrix");
  }
  for (double c : p.cost.data()) {
    if (!(c >= 0.0 && c <= 2.0)) throw Error(ErrorCode::InvalidArgument, "cost entry outside [0, 2]");
  }
  for (const Vector* v : {&p.source, &p.target}) {
    for (double x : *v) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "negative marginal entry");
    }
  }
  const double sa = std::accumulate(p.source.begin(), p.source.end(), 0.0);
  const double sb = std::accumulate(p.target.begin(), p.target.end(), 0.0);
  if (std::abs(sa - 1.0) > kMarginalTolerance || std::abs(sb - 1.0) > kMarginalTolerance ||
      std::abs(sa - sb) > kMarginalTolerance) {
    throw Error(ErrorCode::InfeasibleMarginals,
                "marginal masses " + std::to_string(sa) + " and " + std::to_string(sb));
  }
}

namespace {

// Flows this close to zero after an update are degenerate zeros.
constexpr double kSnap = 1e-14;
constexpr double kReducedCostTolerance = 1e-12;

struct BasicCell {
  std::size_t row;
  std::size_t col;
  double flow;
};

class TransportationSimplex {
 public:
  explicit TransportationSimplex(const TransportProblem& p)
      : p_(p), m_(p.cost.rows()), n_(p.cost.cols()) {}

  Matrix solve() {
    least_cost_start();
    const std::size_t guard = 50 * (m_ * n_) + 1000;
    for (std::size_t iter = 0; iter < guard; ++iter) {
      compute_potentials();
      const auto entering = find_entering();
      if (!entering) return to_matrix();
      pivot(entering->first, entering->second);
    }
    throw Error(ErrorCode::NumericalFailure,
                "transportation simplex exceeded " + std::to_string(guard) + " pivots");
  }

 private:
  std::size_t col_node(std::size_t j) const { return m_ + j; }

  // Least-cost rule: walk cells by (cost, index); each allocation retires
  // exactly one line (the last one retires both), which yields m + n - 1
  // basic cells forming a spanning tree.
  void least_cost_start() {
    std::vector<std::size_t> order(m_ * n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& c = p_.cost.data();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return c[x] < c[y]; });

    Vector ra = p_.source;
    Vector rb = p_.target;
    std::vector<bool> row_done(m_, false), col_done(n_, false);
    std::size_t rows_left = m_, cols_left = n_;

    for (std::size_t idx : order) {
      const std::size_t i = idx / n_;
      const std::size_t j = idx % n_;
      if (row_done[i] || col_done[j]) continue;
      const double x = std::min(ra[i], rb[j]);
      basis_.push_back({i, j, x});
      ra[i] -= x;
      rb[j] -= x;
      if (rows_left == 1 && cols_left == 1) break;
      if ((ra[i] <= rb[j] && rows_left > 1) || cols_left == 1) {
        row_done[i] = true;
        --rows_left;
        rb[j] += ra[i];  // fold rounding residue into the surviving line
      } else {
        col_done[j] = true;
        --cols_left;
        ra[i] += rb[j];
      }
    }
    for (auto& b : basis_) {
      if (b.flow < kSnap) b.flow = 0.0;
    }
  }

  void build_adjacency() {
    adj_.assign(m_ + n_, {});
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      adj_[basis_[k].row].push_back(k);
      adj_[col_node(basis_[k].col)].push_back(k);
    }
  }

  void compute_potentials() {
    build_adjacency();
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<bool> seen(m_ + n_, false);
    std::vector<std::size_t> stack = {0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t k : adj_[node]) {
        const auto& b = basis_[k];
        const std::size_t rn = b.row, cn = col_node(b.col);
        if (!seen[cn]) {
          v_[b.col] = p_.cost(b.row, b.col) - u_[b.row];
          seen[cn] = true;
          stack.push_back(cn);
        }
        if (!seen[rn]) {
          u_[b.row] = p_.cost(b.row, b.col) - v_[b.col];
          seen[rn] = true;
          stack.push_back(rn);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw Error(ErrorCode::NumericalFailure, "basis is not a spanning tree");
    }
    in_basis_.assign(m_ * n_, false);
    for (const auto& b : basis_) in_basis_[b.row * n_ + b.col] = true;
  }

  std::optional<std::pair<std::size_t, std::size_t>> find_entering() const {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (in_basis_[i * n_ + j]) continue;
        if (p_.cost(i, j) - u_[i] - v_[j] < -kReducedCostTolerance) return std::pair{i, j};
      }
    }
    return std::nullopt;
  }

  // Tree path from column node of `col` to row node `row`, as basis indices
  // in walk order. Its length is odd; entries alternate -,+,-,... in the cycle.
  std::vector<std::size_t> tree_path(std::size_t row, std::size_t col) const {
    constexpr auto kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent_edge(m_ + n_, kNone);
    std::vector<bool> seen(m_ + n_, false);
    std::vector<std::size_t> stack = {row};
    seen[row] = true;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t k : adj_[node]) {
        const auto& b = basis_[k];
        const std::size_t other = node < m_ ? col_node(b.col) : b.row;
        if (seen[other]) continue;
        seen[other] = true;
        parent_edge[other] = k;
        stack.push_back(other);
      }
    }
    std::vector<std::size_t> path;
    std::size_t node = col_node(col);
    while (node != row) {
      const std::size_t k = parent_edge[node];
      path.push_back(k);
      node = node < m_ ? col_node(basis_[k].col) : basis_[k].row;
    }
    return path;
  }

  void pivot(std::size_t row, std::size_t col) {
    const auto path = tree_path(row, col);

    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < path.size(); s += 2) theta = std::min(theta, basis_[path[s]].flow);

    std::size_t leaving = path.front();
    std::size_t leaving_index = static_cast<std::size_t>(-1);
    for (std::size_t s = 0; s < path.size(); s += 2) {
      const auto& b = basis_[path[s]];
      const std::size_t index = b.row * n_ + b.col;
      if (b.flow <= theta + kSnap && index < leaving_index) {
        leaving = path[s];
        leaving_index = index;
      }
    }

    for (std::size_t s = 0; s < path.size(); ++s) {
      auto& b = basis_[path[s]];
      b.flow += (s % 2 == 0) ? -theta : theta;
      if (b.flow < kSnap) b.flow = 0.0;
    }
    basis_[leaving] = {row, col, theta < kSnap ? 0.0 : theta};
  }

  Matrix to_matrix() const {
    Matrix plan(m_, n_);
    for (const auto& b : basis_) plan(b.row, b.col) = b.flow;
    return plan;
  }

  const TransportProblem& p_;
  std::size_t m_;
  std::size_t n_;
  std::vector<BasicCell> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<bool> in_basis_;
  Vector u_;
  Vector v_;
};

}  // namespace

AlignmentPlan solve_ot(const TransportProblem& problem) {
  validate(problem);
  const std::size_t m = problem.cost.rows();
  const std::size_t n = problem.cost.cols();

  AlignmentPlan out;
  if (m == 1 || n == 1) {
    // Only one feasible coupling: the single row/column equals the other marginal.
    out.plan = Matrix(m, n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) out.plan(i, j) = m == 1 ? problem.target[j] : problem.source[i];
    }
  } else {
    out.plan = TransportationSimplex(problem).solve();
  }

  out.zero_mask.resize(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.objective += problem.cost(i, j) * out.plan(i, j);
      out.zero_mask[i * n + j] = out.plan(i, j) < kZeroThreshold ? 1 : 0;
    }
  }
  return out;
}

}  // namespace nsir::ot
