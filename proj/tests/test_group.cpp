#include <gtest/gtest.h>

#include <algorithm>

#include "orbi/conjugacy.hpp"
#include "orbi/counterexamples.hpp"
#include "orbi/error.hpp"
#include "orbi/group.hpp"
#include "orbi/linalg.hpp"

#include "corpus.hpp"
#include "oracles.hpp"

namespace orbi {
namespace {

Matrix diag2(int a, int b) { return Matrix::from_rows({{a, 0}, {0, b}}); }
Matrix rot90() { return Matrix::from_rows({{0, -1}, {1, 0}}); }

std::vector<Eigen::MatrixXd> real_elements(const FiniteMatrixGroup& g) {
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t i = 0; i < g.order(); ++i) out.push_back(g.real_element(i));
  return out;
}

TEST(CloseGenerators, MinusIdentity) {
  FiniteMatrixGroup g = close_generators({diag2(-1, -1)}, 100);
  ASSERT_EQ(g.order(), 2U);
  EXPECT_TRUE(equal(g.element(0), Matrix::identity(2), 0));
  EXPECT_TRUE(equal(g.element(1), diag2(-1, -1), 0));
}

TEST(CloseGenerators, RotationMatchesBruteForcePowers) {
  std::size_t powers = 1;
  Matrix p = rot90();
  while (!equal(p, Matrix::identity(2), 0)) {
    p = p * rot90();
    ++powers;
  }
  FiniteMatrixGroup g = close_generators({rot90()}, 100);
  EXPECT_EQ(g.order(), powers);
  EXPECT_EQ(g.order(), 4U);
}

TEST(CloseGenerators, Errors) {
  try {
    close_generators({diag2(2, 1)}, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_finite);
  }
  try {
    close_generators({diag2(0, 1)}, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular);
  }
}

TEST(Group, TablesAreConsistentOnCorpus) {
  for (const auto& [name, g] : test::group_corpus()) {
    const double tol = 1e-9;
    for (std::size_t i = 0; i < g.order(); ++i) {
      EXPECT_EQ(g.multiply(i, g.inverse(i)), 0U) << name;
      for (std::size_t j = 0; j < g.order(); ++j) {
        Eigen::MatrixXd prod = g.real_element(i) * g.real_element(j);
        EXPECT_TRUE(equal_real(prod, g.real_element(g.multiply(i, j)), tol)) << name;
      }
    }
    // No duplicates.
    for (std::size_t i = 0; i < g.order(); ++i) {
      for (std::size_t j = i + 1; j < g.order(); ++j) EXPECT_FALSE(equal(g.element(i), g.element(j), tol)) << name;
    }
  }
}

TEST(Stabilizer, Examples) {
  FiniteMatrixGroup pm = sign_group(2);
  EXPECT_EQ(stabilizer(pm, Vector{0, 0}).order(), 2U);
  EXPECT_EQ(stabilizer(pm, Vector{1, 0}).order(), 1U);
  FiniteMatrixGroup d4 = dihedral4();
  FiniteMatrixGroup s = stabilizer(d4, Vector{1, 0});
  std::size_t expected = oracle::stabilizer_size(real_elements(d4), Eigen::Vector2d(1, 0), 0);
  ASSERT_EQ(s.order(), expected);
  ASSERT_EQ(s.order(), 2U);
  EXPECT_TRUE(s.find(diag2(1, -1)).has_value());
  EXPECT_THROW(stabilizer(d4, Vector{1, 0, 0}), Error);
}

TEST(Orbit, Examples) {
  EXPECT_EQ(orbit(rotation_group(4), Vector{0, 0}).size(), 1U);
  auto o = orbit(rotation_group(4), Vector{1, 0});
  ASSERT_EQ(o.size(), 4U);
  for (const Vector& v : {Vector{1, 0}, Vector{0, 1}, Vector{-1, 0}, Vector{0, -1}}) {
    EXPECT_TRUE(std::any_of(o.begin(), o.end(), [&](const Vector& w) { return equal(v, w, 0); }));
  }
  auto pm = orbit(sign_group(2), Vector{2, 3});
  ASSERT_EQ(pm.size(), 2U);
  EXPECT_TRUE(equal(pm[1], Vector{-2, -3}, 0) || equal(pm[0], Vector{-2, -3}, 0));
}

TEST(Orbit, OrbitStabilizerOnRandomRationalPoints) {
  Rng rng(17);
  for (const auto& [name, g] : test::group_corpus()) {
    auto elems = real_elements(g);
    for (int k = 0; k < 30; ++k) {
      std::vector<Scalar> entries;
      for (std::size_t i = 0; i < g.dim(); ++i) {
        // Zeros on purpose, so points on fixed lines appear.
        entries.push_back(Scalar::rational(static_cast<long>(rng.index(5)) - 2, 1 + static_cast<long>(rng.index(2))));
      }
      Vector u(entries);
      Eigen::VectorXd ur = u.to_real();
      const double tol = 1e-9;
      std::size_t o = g.mode() == ScalarMode::exact ? orbit(g, u).size() : orbit(g, ur, tol).size();
      std::size_t s = g.mode() == ScalarMode::exact ? stabilizer(g, u).order() : stabilizer(g, ur, tol).order();
      EXPECT_EQ(o * s, g.order()) << name;
      EXPECT_EQ(o, oracle::orbit_size(elems, ur, 1e-7)) << name;
      EXPECT_EQ(s, oracle::stabilizer_size(elems, ur, 1e-7)) << name;
    }
  }
}

TEST(InvariantGram, Examples) {
  EXPECT_TRUE(equal(invariant_gram(sign_group(2)).gram, diag2(2, 2), 0));
  EXPECT_TRUE(equal(invariant_gram(rotation_group(4)).gram, diag2(4, 4), 0));
  FiniteMatrixGroup swap = close_generators({Matrix::from_rows({{0, 1}, {1, 0}})});
  EXPECT_TRUE(equal(invariant_gram(swap).gram, diag2(2, 2), 0));
}

TEST(InvariantGram, InvariantAndPositiveOnCorpus) {
  for (const auto& [name, g] : test::group_corpus()) {
    InvariantGram gr = invariant_gram(g);
    EXPECT_TRUE(equal_real(gr.real, oracle::averaged_gram(real_elements(g)), 1e-9)) << name;
    for (std::size_t i = 0; i < g.order(); ++i) {
      if (gr.gram.is_exact() && g.element(i).is_exact()) {
        EXPECT_TRUE(equal(g.element(i).transpose() * gr.gram * g.element(i), gr.gram, 0)) << name;
      } else {
        Eigen::MatrixXd m = g.real_element(i).transpose() * gr.real * g.real_element(i);
        EXPECT_LE((m - gr.real).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, gr.real.cwiseAbs().maxCoeff())) << name;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gr.real);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0) << name;
    EXPECT_LT((gr.real - gr.real.transpose()).norm(), 1e-12) << name;
  }
}

TEST(GammaNorm, Examples) {
  InvariantGram gr = invariant_gram(sign_group(2));
  EXPECT_EQ(gamma_norm(gr, Vector{0, 0}), Scalar(0));
  EXPECT_EQ(gamma_norm(gr, Vector{1, 0}), Scalar(2));  // squared in exact mode
  EXPECT_NEAR(gamma_norm(gr, Eigen::VectorXd(Eigen::Vector2d(1, 0))), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(gamma_norm(gr, Vector{1, 0, 0}), Error);
}

TEST(GammaNorm, InvariantOnCorpus) {
  Rng rng(2);
  for (const auto& [name, g] : test::group_corpus()) {
    InvariantGram gr = invariant_gram(g);
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd v(g.dim());
      for (std::size_t i = 0; i < g.dim(); ++i) v[i] = rng.uniform(-2, 2);
      const double n = gamma_norm(gr, v);
      for (std::size_t i = 0; i < g.order(); ++i) {
        EXPECT_NEAR(gamma_norm(gr, Eigen::VectorXd(g.real_element(i) * v)), n, 1e-9 * std::max(1.0, n)) << name;
      }
    }
  }
}

TEST(IsReflection, Examples) {
  EXPECT_TRUE(is_reflection(diag2(1, -1)));
  EXPECT_FALSE(is_reflection(diag2(-1, -1)));
  EXPECT_FALSE(is_reflection(Matrix::identity(2)));
  EXPECT_THROW(is_reflection(Matrix(2, 3)), Error);
  EXPECT_TRUE(is_reflection_free(rotation_group(4)));
  EXPECT_FALSE(is_reflection_free(dihedral4()));
}

TEST(Conjugacy, Examples) {
  auto self = conjugate_in_gl(sign_group(2), sign_group(2));
  ASSERT_TRUE(self.has_value());
  EXPECT_TRUE(is_invertible(self->intertwiner));

  EXPECT_FALSE(conjugate_in_gl(sign_group(2), mirror_group()).has_value());

  Matrix a = Matrix::from_rows({{1, 1}, {0, 1}});
  FiniteMatrixGroup c4 = rotation_group(4);
  FiniteMatrixGroup h = conjugate_group(c4, a);
  auto c = conjugate_in_gl(c4, h);
  ASSERT_TRUE(c.has_value());
  Matrix l = c->intertwiner;
  Matrix li = inverse(l);
  for (std::size_t i = 0; i < c4.order(); ++i) {
    Matrix image = l * c4.element(i) * li;
    auto found = h.find(image);
    ASSERT_TRUE(found.has_value());
    EXPECT_EQ(*found, c->isomorphism.image[i]);
  }
  EXPECT_THROW(conjugate_in_gl(sign_group(2), sign_group(3)), Error);
}

TEST(Conjugacy, SymmetricAndPreservesReflections) {
  auto corpus = test::group_corpus();
  for (const auto& [na, a] : corpus) {
    for (const auto& [nb, b] : corpus) {
      if (a.dim() != b.dim() || a.order() > 12 || b.order() > 12) continue;
      auto ab = conjugate_in_gl(a, b);
      auto ba = conjugate_in_gl(b, a);
      EXPECT_EQ(ab.has_value(), ba.has_value()) << na << " " << nb;
      if (!ab) continue;
      EXPECT_TRUE(is_homomorphism(a, b, ab->isomorphism));
      EXPECT_TRUE(ab->isomorphism.is_injective());
      for (std::size_t i = 0; i < a.order(); ++i) {
        EXPECT_EQ(is_reflection(a.element(i), 1e-9), is_reflection(b.element(ab->isomorphism.image[i]), 1e-9))
            << na << " " << nb;
      }
    }
  }
}

TEST(Conjugacy, ConjugatesAreFoundAndNonConjugatesAreNot) {
  auto corpus = test::group_corpus();
  const std::size_t half = corpus.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // base and its random conjugate
    EXPECT_TRUE(conjugate_in_gl(corpus[i].group, corpus[i + half].group).has_value()) << corpus[i].name;
  }
  // C4 and D4 have the same order but are not isomorphic.
  EXPECT_FALSE(conjugate_in_gl(rotation_group(4), dihedral4()).has_value());
  // C2 as rotation by pi is -I; conjugate to {+-I}.
  EXPECT_TRUE(conjugate_in_gl(rotation_group(2), sign_group(2)).has_value());
}

}  // namespace
}  // namespace orbi
