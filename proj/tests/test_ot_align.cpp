#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "nsir/error.hpp"
#include "nsir/ot_align.hpp"
#include "oracles.hpp"

using namespace nsir;
using namespace nsir::ot;

namespace {

Matrix random_cost(std::mt19937& rng, std::size_t m, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Matrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c(i, j) = u(rng);
  }
  return c;
}

void expect_feasible(const AlignmentPlan& p, const Vector& a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      EXPECT_GE(p.plan(i, j), 0.0);
      s += p.plan(i, j);
    }
    EXPECT_NEAR(s, a[i], 1e-8);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += p.plan(i, j);
    EXPECT_NEAR(s, b[j], 1e-8);
  }
  EXPECT_LE(p.nonzero_count(), a.size() + b.size() - 1);
}

}  // namespace

TEST(CostMatrix, CosineDistanceEndpoints) {
  const Matrix H{{1, 0}, {0, 1}, {-1, 0}};
  const Matrix Z{{1, 0}};
  const Matrix C = build_cost_matrix(H, Z);
  EXPECT_DOUBLE_EQ(C(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(C(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(C(2, 0), 2.0);
}

TEST(CostMatrix, ScaleInvariant) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  Matrix H(4, 5), Z(3, 5);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 5; ++c) H(r, c) = g(rng);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 5; ++c) Z(r, c) = g(rng);
  Matrix H2 = H;
  for (std::size_t c = 0; c < 5; ++c) H2(2, c) *= 7.5;
  const Matrix a = build_cost_matrix(H, Z), b = build_cost_matrix(H2, Z);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a(i, j), b(i, j), 1e-14);
}

TEST(CostMatrix, Errors) {
  try {
    build_cost_matrix(Matrix{{1, 0}}, Matrix{{1, 0}, {0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroNormRow);
    EXPECT_EQ(e.detail(), 1u);
    EXPECT_NE(std::string(e.what()).find("FOL"), std::string::npos);
  }
  try {
    build_cost_matrix(Matrix{{1, 0}}, Matrix{{1, 0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(UniformMarginals, Values) {
  auto [a, b] = uniform_marginals(2, 4);
  EXPECT_EQ(a, (Vector{0.5, 0.5}));
  EXPECT_EQ(b, (Vector{0.25, 0.25, 0.25, 0.25}));
  auto [c, d] = uniform_marginals(1, 1);
  EXPECT_EQ(c, Vector{1.0});
  EXPECT_EQ(d, Vector{1.0});
}

TEST(SolveOt, SingleCell) {
  const auto p = solve_ot({Matrix{{0.3}}, {1.0}, {1.0}});
  EXPECT_EQ(p.plan, (Matrix{{1.0}}));
  EXPECT_DOUBLE_EQ(p.objective, 0.3);
}

TEST(SolveOt, TwoByTwoDiagonal) {
  const auto p = solve_ot({Matrix{{0, 1}, {1, 0}}, {0.5, 0.5}, {0.5, 0.5}});
  EXPECT_EQ(p.plan, (Matrix{{0.5, 0.0}, {0.0, 0.5}}));
  EXPECT_DOUBLE_EQ(p.objective, 0.0);
  EXPECT_TRUE(p.is_zero(0, 1));
  EXPECT_TRUE(p.is_zero(1, 0));
  EXPECT_FALSE(p.is_zero(0, 0));
}

TEST(SolveOt, SingleRowOrColumnIsClosedForm) {
  const auto row = solve_ot({Matrix{{0.2, 1.5, 0.9}}, {1.0}, {0.2, 0.3, 0.5}});
  EXPECT_EQ(row.plan, (Matrix{{0.2, 0.3, 0.5}}));
  const auto col = solve_ot({Matrix{{0.2}, {1.5}}, {0.25, 0.75}, {1.0}});
  EXPECT_EQ(col.plan, (Matrix{{0.25}, {0.75}}));
}

TEST(SolveOt, Preconditions) {
  auto code = [](const TransportProblem& p) {
    try {
      solve_ot(p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code({Matrix{{0, 1}, {1, 0}}, {0.5, 0.6}, {0.5, 0.5}}), ErrorCode::InfeasibleMarginals);
  EXPECT_EQ(code({Matrix{{0, 1}, {1, 0}}, {0.5}, {0.5, 0.5}}), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code({Matrix{{0, 3}, {1, 0}}, {0.5, 0.5}, {0.5, 0.5}}), ErrorCode::InvalidArgument);
  EXPECT_EQ(code({Matrix{{0, 1}, {1, 0}}, {1.5, -0.5}, {0.5, 0.5}}), ErrorCode::InvalidArgument);
}

// Random 3x4 instance frozen against the vertex-enumeration oracle.
TEST(SolveOt, FrozenThreeByFour) {
  const Matrix C{{0.90, 0.15, 1.20, 0.40}, {0.30, 1.70, 0.05, 0.80}, {1.10, 0.60, 0.70, 0.20}};
  auto [a, b] = uniform_marginals(3, 4);
  const auto oracle = oracle::brute_force_ot(C, a, b);
  const auto p = solve_ot({C, a, b});
  EXPECT_NEAR(p.objective, oracle.objective, 1e-12);
  EXPECT_NEAR(p.objective, 0.2791666666666667, 1e-12);
  expect_feasible(p, a, b);
}

TEST(SolveOt, DegenerateTiesAreDeterministic) {
  const Matrix C(3, 3, 1.0);  // every plan is optimal
  auto [a, b] = uniform_marginals(3, 3);
  const auto first = solve_ot({C, a, b});
  for (int k = 0; k < 5; ++k) EXPECT_EQ(solve_ot({C, a, b}).plan, first.plan);
  expect_feasible(first, a, b);
}

TEST(SolveOtProperty, MatchesOracleOnSmallInstances) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng() % 4, n = 1 + rng() % (8 - m > 4 ? 4 : 8 - m);
    const Matrix C = random_cost(rng, m, n);
    auto [a, b] = uniform_marginals(m, n);
    const auto p = solve_ot({C, a, b});
    const auto oracle = oracle::brute_force_ot(C, a, b);
    EXPECT_NEAR(p.objective, oracle.objective, 1e-8) << m << "x" << n;
    expect_feasible(p, a, b);
    double independent = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) independent += C(i, j) * a[i] * b[j];
    EXPECT_LE(p.objective, independent + 1e-12);
  }
}

TEST(SolveOtProperty, NonUniformMarginals) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng() % 3, n = 2 + rng() % 3;
    Vector a(m), b(n);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
    for (auto& x : a) x /= sa;
    for (auto& x : b) x /= sb;
    // Re-balance the rounding residue into the last entry.
    a.back() += 1.0 - std::accumulate(a.begin(), a.end(), 0.0);
    b.back() += 1.0 - std::accumulate(b.begin(), b.end(), 0.0);
    const Matrix C = random_cost(rng, m, n);
    const auto p = solve_ot({C, a, b});
    EXPECT_NEAR(p.objective, oracle::brute_force_ot(C, a, b).objective, 1e-8);
    expect_feasible(p, a, b);
  }
}

TEST(SolveOtProperty, LargerInstancesStayFeasibleAndSparse) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 10 + rng() % 30, n = 10 + rng() % 30;
    auto [a, b] = uniform_marginals(m, n);
    const auto p = solve_ot({random_cost(rng, m, n), a, b});
    expect_feasible(p, a, b);
  }
}
