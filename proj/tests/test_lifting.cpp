#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "orbi/counterexamples.hpp"
#include "orbi/error.hpp"
#include "orbi/lifting.hpp"
#include "orbi/linalg.hpp"

#include "corpus.hpp"
#include "oracles.hpp"

namespace orbi {
namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd pt(double x, double y) { return Eigen::Vector2d(x, y); }
Eigen::VectorXd origin(std::size_t n = 2) { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)); }

MapExpr linear(const Eigen::MatrixXd& a) { return MapExpr::linear(a, origin(static_cast<std::size_t>(a.rows()))); }

QuotientMap linear_quotient_map(const FiniteMatrixGroup& g, const FiniteMatrixGroup& h, const Eigen::MatrixXd& a,
                                Region region) {
  MapExpr f0 = linear(a);
  LinearQuotient tgt(h);
  return QuotientMap(LinearQuotient(g), std::move(region), tgt,
                     [f0, tgt](const Eigen::VectorXd& x) { return tgt.canonical_rep_unchecked(f0(x)); });
}

std::size_t find_element(const FiniteMatrixGroup& g, const Eigen::MatrixXd& m) {
  auto i = g.find_real(m, 1e-9);
  EXPECT_TRUE(i.has_value());
  return i.value_or(0);
}

TEST(UniqueGroupElement, Examples) {
  FiniteMatrixGroup c4 = rotation_group(4);
  Region ball = Region::ball(origin(), 1.0);
  EXPECT_EQ(unique_group_element(MapExpr::identity(2), ball, c4), 0U);
  Eigen::Matrix2d r;
  r << 0, -1, 1, 0;
  EXPECT_EQ(unique_group_element(linear(r), ball, c4), find_element(c4, r));

  FiniteMatrixGroup pm = sign_group(2);
  MapExpr split(2, {Expr::ite(Expr::coord(0) > Expr(0.0), Expr::coord(0), -Expr::coord(0)),
                    Expr::ite(Expr::coord(0) > Expr(0.0), Expr::coord(1), -Expr::coord(1))});
  Region two = Region::finite_union({Region::ball(pt(2, 0), 0.5), Region::ball(pt(-2, 0), 0.5)});
  try {
    unique_group_element(split, two, pm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::inconsistent);
  }
}

TEST(UniqueGroupElement, Errors) {
  FiniteMatrixGroup c4 = rotation_group(4);
  try {
    unique_group_element(linear(2 * Eigen::Matrix2d::Identity()), Region::ball(pt(1, 0), 0.2), c4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_orbit_preserving);
  }
  // Every sample is fixed by the whole group.
  try {
    unique_group_element(MapExpr::identity(2), Region::ball(origin(), 1e-300), c4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ambiguous);
  }
}

TEST(UniqueGroupElement, ExactOnCorpus) {
  for (const auto& [name, g] : test::group_corpus()) {
    Eigen::VectorXd c = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.dim())) * 0.7;
    for (std::size_t k = 0; k < g.order(); ++k) {
      LiftOptions lo;
      lo.samples = 100;
      EXPECT_EQ(unique_group_element(linear(g.real_element(k)), Region::ball(c, 0.3), g, lo), k) << name;
    }
  }
}

TEST(PathLift, IdentityReturnsPath) {
  FiniteMatrixGroup c4 = rotation_group(4);
  QuotientMap f = linear_quotient_map(c4, c4, Eigen::Matrix2d::Identity(), Region::ball(origin(), 2));
  auto path = segment(pt(0.3, 0.4), pt(-0.8, 0.1), 20);
  auto lifted = path_lift(f, path, path.front());
  ASSERT_EQ(lifted.size(), path.size());
  for (std::size_t i = 0; i < path.size(); ++i) EXPECT_LT((lifted[i] - path[i]).norm(), 1e-9);
}

TEST(PathLift, HalfAngleArcFollowsFormula) {
  MapExpr g(1, {Expr::coord(0)});
  QuotientMap f = halfangle_map(g, Region::annulus(2, 0.5, 1.5));
  std::vector<Eigen::VectorXd> arc;
  for (int k = 0; k <= 40; ++k) {
    double t = -0.5 + 2.0 * k / 40;
    arc.push_back(pt(std::cos(t), std::sin(t)));
  }
  auto lifted = path_lift(f, arc, pt(std::cos(-0.25), std::sin(-0.25)));
  for (int k = 0; k <= 40; ++k) {
    double t = -0.5 + 2.0 * k / 40;
    EXPECT_LT((lifted[static_cast<std::size_t>(k)] - pt(std::cos(t / 2), std::sin(t / 2))).norm(), 1e-9);
  }
}

TEST(PathLift, HalfAngleFullCircleFlipsSign) {
  QuotientMap f = halfangle_map(default_halfangle_profile());
  auto loop = circle_loop(origin(), 0.75, 64);
  auto lifted = path_lift(f, loop, f(loop.front()));
  EXPECT_LT((lifted.back() - oracle::sqrt_monodromy_sign() * lifted.front()).norm(), 1e-9);
  EXPECT_GT(lifted.front().norm(), 1e-3);
}

TEST(PathLift, SeedOffOrbit) {
  FiniteMatrixGroup c4 = rotation_group(4);
  QuotientMap f = linear_quotient_map(c4, c4, Eigen::Matrix2d::Identity(), Region::ball(origin(), 2));
  try {
    path_lift(f, segment(pt(0.3, 0.4), pt(0.5, 0.4), 4), pt(9, 9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::seed_off_orbit);
  }
}

TEST(Monodromy, Examples) {
  FiniteMatrixGroup c4 = rotation_group(4);
  QuotientMap id = linear_quotient_map(c4, c4, Eigen::Matrix2d::Identity(), Region::ball(origin(), 2));
  std::vector<Eigen::VectorXd> constant(10, pt(0.5, 0.2));
  EXPECT_EQ(monodromy(id, constant, pt(0.5, 0.2)), 0U);
  EXPECT_EQ(monodromy(id, circle_loop(pt(0.2, 0.1), 0.6, 48), pt(0.8, 0.1)), 0U);

  // Angle doubling on the annulus: z -> [sqrt z] has monodromy -I on the core loop.
  QuotientMap doubling = halfangle_map(MapExpr(1, {Expr::coord(0)}), Region::annulus(2, 0.5, 1.5));
  auto loop = circle_loop(origin(), 1.0, 64);
  std::size_t m = monodromy(doubling, loop, doubling(loop.front()));
  EXPECT_LT((doubling.target().group().real_element(m) + Eigen::Matrix2d::Identity()).norm(), 1e-12);
}

TEST(RadialLift, LinearIsomorphismLifts) {
  Rng rng(8);
  FiniteMatrixGroup c3 = rotation_group(3);
  Matrix a = test::random_rational_matrix(2, rng);
  FiniteMatrixGroup h = conjugate_group(c3, a);
  QuotientMap f = linear_quotient_map(c3, h, a.to_real(), Region::ball(origin(), 1.0));
  LiftReport rep = radial_lift_extension(f, 0.2, std::nullopt);
  ASSERT_EQ(rep.status, LiftStatus::lifted) << rep.note;
  ASSERT_TRUE(rep.lift);
  ASSERT_TRUE(rep.homomorphism.has_value());
  EXPECT_FALSE(rep.obstruction.has_value());
  double best = INFINITY;
  auto xs = sample_region(Region::ball(origin(), 0.95), 100, 1);
  for (std::size_t k = 0; k < h.order(); ++k) {
    double err = 0;
    for (const auto& x : xs) err = std::max(err, ((*rep.lift)(x) - h.real_element(k) * a.to_real() * x).norm());
    best = std::min(best, err);
  }
  EXPECT_LE(best, 1e-8);
}

TEST(RadialLift, HalfAngleOnAnnulusIsObstructed) {
  QuotientMap f = halfangle_map(MapExpr(1, {Expr::coord(0)}), Region::annulus(2, 0.5, 1.5));
  LiftReport rep = radial_lift_extension(f, 0.6, std::nullopt);
  ASSERT_EQ(rep.status, LiftStatus::non_liftable);
  ASSERT_TRUE(rep.obstruction.has_value());
  EXPECT_FALSE(rep.lift);
  ASSERT_TRUE(rep.monodromy.has_value());
  EXPECT_LT((f.target().group().real_element(*rep.monodromy) + Eigen::Matrix2d::Identity()).norm(), 1e-12);
}

TEST(RadialLift, Example2IsObstructed) {
  FiniteMatrixGroup c4 = rotation_group(4);
  MapExpr f2 = example2_map();
  QuotientMap f(LinearQuotient(c4), Region::ball(origin(), 0.25), LinearQuotient(c4),
                [f2](const Eigen::VectorXd& x) { return f2(x); });
  LiftReport rep = radial_lift_extension(f, 0.05, f2);
  EXPECT_EQ(rep.status, LiftStatus::non_liftable);
  EXPECT_TRUE(rep.obstruction.has_value());
}

// Lifts grown from seeds g f0 and f0 differ by the constant g.
TEST(RadialLift, UniqueUpToTargetGroup) {
  Rng rng(13);
  for (const FiniteMatrixGroup& g : {rotation_group(4), sign_group(2), rotation_group(6)}) {
    Matrix a = test::random_rational_matrix(2, rng);
    FiniteMatrixGroup h = conjugate_group(g, a);
    QuotientMap f = linear_quotient_map(g, h, a.to_real(), Region::ball(origin(), 1.0));
    MapExpr f0 = linear(a.to_real());
    const std::size_t k = h.order() - 1;
    LiftReport r1 = radial_lift_extension(f, 0.2, f0);
    LiftReport r2 = radial_lift_extension(f, 0.2, f0.left_multiply(h.real_element(k)));
    ASSERT_EQ(r1.status, LiftStatus::lifted);
    ASSERT_EQ(r2.status, LiftStatus::lifted);
    for (const auto& x : sample_region(Region::ball(origin(), 0.95), 100, 2)) {
      EXPECT_LT(((*r2.lift)(x) - h.real_element(k) * (*r1.lift)(x)).norm(), 1e-8);
    }
  }
}

TEST(InducedHomomorphism, Examples) {
  FiniteMatrixGroup c4 = rotation_group(4);
  Region ball = Region::ball(origin(), 1.0);
  GroupHomomorphism id = induced_homomorphism(MapExpr::identity(2), c4, c4, ball);
  EXPECT_TRUE(id.is_identity_map());

  Matrix a = Matrix::from_rows({{1, 1}, {0, 1}});
  FiniteMatrixGroup h = conjugate_group(c4, a);
  GroupHomomorphism got = induced_homomorphism(linear(a.to_real()), c4, h, ball);
  Matrix ai = inverse(a);
  for (std::size_t i = 0; i < c4.order(); ++i) EXPECT_EQ(got.image[i], *h.find(a * c4.element(i) * ai));

  // The slice chart at a point with stabilizer G_u induces the inclusion G_u -> G.
  FiniteMatrixGroup d4 = dihedral4();
  LinearQuotient q(d4);
  SliceChart s = q.slice_chart(pt(1, 0));
  GroupHomomorphism inc = induced_homomorphism(s.map, s.stabilizer, d4, Region::ball(origin(), 1.0));
  for (std::size_t i = 0; i < s.stabilizer.order(); ++i) EXPECT_EQ(inc.image[i], s.stabilizer_indices[i]);
}

TEST(InducedHomomorphism, InjectiveAndMatchesJacobianOnCorpus) {
  Rng rng(23);
  for (const auto& [name, g] : test::group_corpus()) {
    Matrix a = test::random_rational_matrix(g.dim(), rng);
    FiniteMatrixGroup h = conjugate_group(g, a);
    MapExpr f = linear(a.to_real());
    GroupHomomorphism hom = induced_homomorphism(f, g, h, Region::ball(origin(g.dim()), 1.0));
    EXPECT_TRUE(hom.is_injective()) << name;
    EXPECT_TRUE(is_homomorphism(g, h, hom)) << name;
    Eigen::MatrixXd l = jacobian_fd(f, origin(g.dim()));
    for (std::size_t i = 0; i < g.order(); ++i) {
      EXPECT_LE((l * g.real_element(i) * l.inverse() - h.real_element(hom.image[i])).cwiseAbs().maxCoeff(), 1e-6) << name;
    }
  }
}

TEST(InducedHomomorphism, NoConsistentImage) {
  FiniteMatrixGroup c4 = rotation_group(4);
  MapExpr f(2, {Expr::coord(0) * Expr::coord(0) + Expr(0.5), Expr::coord(1)});
  try {
    induced_homomorphism(f, c4, c4, Region::ball(origin(), 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::no_consistent_image || e.code() == ErrorCode::not_homomorphism) << e.what();
  }
}

TEST(StabilizerTransport, Examples) {
  LinearQuotient c4(rotation_group(4));
  StabilizerTransport t = stabilizer_transport(MapExpr::identity(2), c4, c4, origin());
  EXPECT_TRUE(t.ok);
  EXPECT_LT((t.jacobian - Eigen::Matrix2d::Identity()).norm(), 1e-9);

  Matrix a = Matrix::from_rows({{1, 1}, {0, 1}});
  LinearQuotient h(conjugate_group(c4.group(), a));
  StabilizerTransport ta = stabilizer_transport(linear(a.to_real()), c4, h, origin());
  EXPECT_TRUE(ta.ok);
  EXPECT_LT((ta.jacobian - a.to_real()).norm(), 1e-9);

  // Stabilizer orders 2 and 1 at the origin. (The half-angle lift only
  // meets a larger stabilizer where g vanishes, and there its Jacobian is
  // singular.)
  LinearQuotient trivial(trivial_group(2));
  LinearQuotient pm(sign_group(2));
  StabilizerTransport bad = stabilizer_transport(MapExpr::identity(2), pm, trivial, origin());
  EXPECT_FALSE(bad.ok);
}

TEST(StabilizerTransport, SingularJacobian) {
  LinearQuotient c4(rotation_group(4));
  MapExpr flat(2, {Expr::coord(0) * Expr::coord(0), Expr::coord(1) * Expr::coord(1)});
  try {
    stabilizer_transport(flat, c4, c4, origin());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular_jacobian);
  }
}

TEST(Voltages, ConsistentCycleAndViolation) {
  FiniteMatrixGroup c4 = rotation_group(4);
  const std::size_t r = find_element(c4, (Eigen::Matrix2d() << 0, -1, 1, 0).finished());
  // Triangle whose voltages compose to the identity.
  std::vector<VoltageEdge> ok = {{0, 1, r}, {1, 2, r}, {2, 0, c4.multiply(r, r)}};
  VoltageSolution s = solve_voltages(c4, 3, 1, ok);
  EXPECT_FALSE(s.violation.has_value());
  EXPECT_EQ(s.correction[0], 0U);
  for (const auto& e : ok) EXPECT_EQ(s.correction[e.b], c4.multiply(s.correction[e.a], e.g));

  std::vector<VoltageEdge> bad = {{0, 1, r}, {1, 2, r}, {2, 0, r}};
  VoltageSolution v = solve_voltages(c4, 3, 1, bad);
  ASSERT_TRUE(v.violation.has_value());
  EXPECT_NE(v.holonomy, 0U);
}

TEST(ExtendFromGenerators, AcceptsRelationsAndRejectsViolations) {
  FiniteMatrixGroup c4 = rotation_group(4);
  ASSERT_EQ(c4.generators().size(), 1U);
  auto id = extend_from_generators(c4, c4, {c4.generators()[0]});
  ASSERT_TRUE(id.has_value());
  EXPECT_TRUE(id->is_identity_map());
  FiniteMatrixGroup pm = sign_group(2);
  // C4 -> {+-I}: generator to -I respects r^4 = 1.
  auto sq = extend_from_generators(c4, pm, {1});
  ASSERT_TRUE(sq.has_value());
  EXPECT_TRUE(is_homomorphism(c4, pm, *sq));
  // {+-I} -> C4 sending -I to a rotation of order 4 violates (-I)^2 = 1.
  EXPECT_FALSE(extend_from_generators(pm, c4, {c4.generators()[0]}).has_value());
}

TEST(Segment, Endpoints) {
  auto s = segment(pt(0, 0), pt(1, 2), 4);
  ASSERT_EQ(s.size(), 5U);
  EXPECT_EQ(s.front(), pt(0, 0));
  EXPECT_LT((s.back() - pt(1, 2)).norm(), 1e-15);
  auto c = circle_loop(pt(1, 1), 0.5, 16);
  for (const auto& p : c) EXPECT_NEAR((p - pt(1, 1)).norm(), 0.5, 1e-12);
  EXPECT_LT(std::abs(std::atan2(c[4][1] - 1, c[4][0] - 1) - kPi / 2), 1e-12);
}

}  // namespace
}  // namespace orbi
