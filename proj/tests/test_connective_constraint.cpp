#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nsir/connective_constraint.hpp"
#include "nsir/error.hpp"
#include "oracles.hpp"

using namespace nsir;

namespace {

Matrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

ot::AlignmentPlan plan_with_mask(std::size_t m, std::size_t n, const std::vector<std::uint8_t>& mask) {
  ot::AlignmentPlan p;
  p.plan = Matrix(m, n);
  p.zero_mask = mask;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask[k]) p.plan(k / n, k % n) = 1.0;
  }
  return p;
}

}  // namespace

TEST(AssignSigma, ThreeCases) {
  const auto seq = fol::tokenize_fol("¬A(x) ∧ B");
  // tokens: ¬ A ( x ) ∧ B
  ASSERT_EQ(seq.tokens.size(), 7u);
  // Two NL rows; row 0 aligns with nothing, row 1 with everything.
  std::vector<std::uint8_t> mask(2 * 7, 0);
  for (std::size_t j = 0; j < 7; ++j) mask[j] = 1;
  const auto sigma = assign_sigma(seq, plan_with_mask(2, 7, mask));
  EXPECT_EQ(sigma(0, 0), -1);
  EXPECT_EQ(sigma(0, 1), 0);
  EXPECT_EQ(sigma(5, 0), 1);
  EXPECT_EQ(sigma(5, 1), 0);
  for (std::size_t j : {1u, 2u, 3u, 4u, 6u}) {
    EXPECT_EQ(sigma(j, 0), 0);
    EXPECT_EQ(sigma(j, 1), 0);
  }
}

TEST(AssignSigma, QuantifiersAreNotConnectives) {
  const auto seq = fol::tokenize_fol("∀x ∃y");
  const auto sigma = assign_sigma(seq, plan_with_mask(1, 4, {1, 1, 1, 1}));
  EXPECT_TRUE(sigma.all_zero());
}

TEST(AssignSigma, ShapeMismatch) {
  const auto seq = fol::tokenize_fol("A ∧ B");
  try {
    assign_sigma(seq, plan_with_mask(1, 2, {0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(AssignSigmaProperty, SupportOnlyOnUnalignedConnectives) {
  std::mt19937 rng(8);
  const auto seq = fol::tokenize_fol("∀x (A(x) → ¬B(x) ∨ C(x) ⊕ D(x) ↔ E(x) ∧ F(x))");
  const std::size_t n = seq.tokens.size();
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng() % 6;
    std::vector<std::uint8_t> mask(m * n);
    for (auto& b : mask) b = rng() % 2;
    const auto sigma = assign_sigma(seq, plan_with_mask(m, n, mask));
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        const int s = sigma(j, i);
        if (s != 0) {
          EXPECT_TRUE(mask[i * n + j]);
          EXPECT_TRUE(fol::is_connective(seq.tokens[j]));
        }
        if (mask[i * n + j] && seq.tokens[j].kind == fol::TokenClass::Negation) {
          EXPECT_EQ(s, -1);
        }
        if (mask[i * n + j] && seq.tokens[j].kind == fol::TokenClass::BinaryConnective) {
          EXPECT_EQ(s, 1);
        }
      }
    }
  }
}

TEST(Attend, EqualLogitsGiveUniformWeights) {
  const Matrix H{{1, 0, 0}, {0, 1, 0}, {2, 3, 0}};
  const Matrix Z{{0, 0, 1}};
  const auto r = attend(H, Z, SigmaMatrix(1, 3), 3.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.weights(0, i), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.pooled[0], 1.0, 1e-15);
  EXPECT_NEAR(r.pooled[1], 4.0 / 3.0, 1e-15);
}

// H rows orthonormal, z = h_1, sigma = -1 everywhere: logits (delta_1i - 1)/sqrt(d_k).
TEST(Attend, NegationFixture) {
  const Matrix H{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const Matrix Z{{1, 0, 0}};
  SigmaMatrix sigma(1, 3);
  for (std::size_t i = 0; i < 3; ++i) sigma(0, i) = -1;
  const double d_k = 3.0;
  const auto r = attend(H, Z, sigma, d_k);
  const double e0 = 1.0, e1 = std::exp(-1.0 / std::sqrt(d_k));
  const double total = e0 + 2 * e1;
  EXPECT_NEAR(r.weights(0, 0), e0 / total, 1e-15);
  EXPECT_NEAR(r.weights(0, 1), e1 / total, 1e-15);
  EXPECT_NEAR(r.weights(0, 2), e1 / total, 1e-15);
  EXPECT_GT(r.weights(0, 0), r.weights(0, 1));
  // sum_i a_i (h_i - z) = (0 - 2 a_1 ... ) componentwise
  EXPECT_NEAR(r.contextual(0, 0), -2 * e1 / total, 1e-15);
  EXPECT_NEAR(r.contextual(0, 1), e1 / total, 1e-15);
  EXPECT_NEAR(r.contextual(0, 2), e1 / total, 1e-15);

  std::vector<std::vector<int>> s(1, std::vector<int>(3, -1));
  const auto naive = oracle::naive_signed_attention(H, Z, s, d_k);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(naive.contextual(0, c), r.contextual(0, c), 1e-15);
}

TEST(Attend, Errors) {
  const Matrix H{{1, 0}}, Z{{1, 0}};
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code([&] { attend(H, Z, SigmaMatrix(2, 1), 2.0); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code([&] { attend(H, Matrix{{1, 0, 0}}, SigmaMatrix(1, 1), 2.0); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code([&] { attend(H, Z, SigmaMatrix(1, 1), 0.0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code([&] { attend(Matrix{{1e200, 0}}, Matrix{{1e200, 0}}, SigmaMatrix(1, 1), 1.0); }),
            ErrorCode::NonFiniteLogit);
}

TEST(Attend, LargeLogitsStayFinite) {
  const Matrix H{{300, 0}, {0, 300}};
  const Matrix Z{{300, 1}};
  const auto r = attend(H, Z, SigmaMatrix(1, 2), 1.0);
  EXPECT_NEAR(r.weights(0, 0), 1.0, 1e-12);
  EXPECT_TRUE(all_finite(r.pooled));
}

TEST(AttendProperty, SigmaZeroMatchesCrossAttention) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng() % 16, m = 1 + rng() % 8, n = 1 + rng() % 8;
    const Matrix H = random_matrix(rng, m, d, 0.7), Z = random_matrix(rng, n, d, 0.7);
    const auto r = attend(H, Z, SigmaMatrix(n, m), static_cast<double>(d));
    const auto naive = oracle::naive_cross_attention(H, Z, static_cast<double>(d));
    for (std::size_t j = 0; j < n; ++j) {
      double row = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        EXPECT_NEAR(r.weights(j, i), naive.weights(j, i), 1e-9);
        EXPECT_GE(r.weights(j, i), 0.0);
        row += r.weights(j, i);
      }
      EXPECT_NEAR(row, 1.0, 1e-9);
      for (std::size_t c = 0; c < d; ++c) EXPECT_NEAR(r.contextual(j, c), naive.contextual(j, c), 1e-9);
    }
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0;
      for (std::size_t j = 0; j < n; ++j) mean += r.contextual(j, c);
      EXPECT_NEAR(r.pooled[c], mean / static_cast<double>(n), 1e-12);
    }
  }
}

TEST(AttendProperty, SignedMatchesNaiveAndPermutationEquivariant) {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng() % 8, m = 2 + rng() % 6, n = 1 + rng() % 6;
    const Matrix H = random_matrix(rng, m, d, 0.5), Z = random_matrix(rng, n, d, 0.5);
    SigmaMatrix sigma(n, m);
    std::vector<std::vector<int>> s(n, std::vector<int>(m));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i) sigma(j, i) = static_cast<std::int8_t>(s[j][i] = static_cast<int>(rng() % 3) - 1);
    const auto r = attend(H, Z, sigma, static_cast<double>(d));
    const auto naive = oracle::naive_signed_attention(H, Z, s, static_cast<double>(d));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < d; ++c) EXPECT_NEAR(r.contextual(j, c), naive.contextual(j, c), 1e-9);

    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix Hp(m, d);
    SigmaMatrix sp(n, m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < d; ++c) Hp(i, c) = H(perm[i], c);
      for (std::size_t j = 0; j < n; ++j) sp(j, i) = sigma(j, perm[i]);
    }
    const auto rp = attend(Hp, Z, sp, static_cast<double>(d));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < d; ++c) EXPECT_NEAR(rp.contextual(j, c), r.contextual(j, c), 1e-12);
  }
}

TEST(Score2, Basics) {
  EXPECT_DOUBLE_EQ(score2(Vector{0.6, 0.8}, Vector{0.6, 0.8}), 1.0);
  EXPECT_DOUBLE_EQ(score2(Vector{1, 0}, Vector{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(score2(Vector{1, 0}, Vector{-1, 0}), -1.0);
  try {
    score2(Vector{1, 0}, Vector{1, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}
