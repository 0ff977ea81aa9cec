#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "orbi/counterexamples.hpp"
#include "orbi/kernels.hpp"
#include "orbi/map_expr.hpp"
#include "orbi/region.hpp"

namespace orbi {
namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd pt(double x, double y) { return Eigen::Vector2d(x, y); }

TEST(Region, BallAndAnnulusMembership) {
  Region b = Region::ball(pt(1, 0), 0.5);
  EXPECT_TRUE(b.contains(pt(1.2, 0.1)));
  EXPECT_FALSE(b.contains(pt(1.5, 0)));  // open
  Region a = Region::annulus(2, 0.5, 1.0);
  EXPECT_TRUE(a.contains(pt(0, 0.75)));
  EXPECT_FALSE(a.contains(pt(0, 0)));
  EXPECT_FALSE(a.contains(pt(1, 0)));
  EXPECT_TRUE(Region::annulus(2, 0, INFINITY).contains(pt(100, 0)));
  EXPECT_FALSE(Region::annulus(2, 0, INFINITY).contains(pt(0, 0)));
}

TEST(Region, GammaBallUsesItsNorm) {
  Eigen::Matrix2d gram;
  gram << 4, 0, 0, 1;
  Region b = Region::gamma_ball(pt(0, 0), 1.0, gram);
  EXPECT_TRUE(b.contains(pt(0, 0.9)));
  EXPECT_FALSE(b.contains(pt(0.6, 0)));
}

TEST(Region, SectorWrapsAround) {
  Region s = Region::sector(0.5, 1.5, 3 * kPi / 4, 5 * kPi / 4);
  EXPECT_TRUE(s.contains(pt(-1, 0)));
  EXPECT_FALSE(s.contains(pt(1, 0)));
  Region w = Region::sector(0.5, 1.5, -kPi / 4, kPi / 4);
  EXPECT_TRUE(w.contains(pt(1, 0)));
  EXPECT_FALSE(w.contains(pt(-1, 0)));
}

TEST(Region, CombinatorsAndAffineImage) {
  Region u = Region::finite_union({Region::ball(pt(-2, 0), 1), Region::ball(pt(2, 0), 1)});
  EXPECT_TRUE(u.contains(pt(2.5, 0)));
  EXPECT_FALSE(u.contains(pt(0, 0)));
  Region i = Region::intersection({Region::ball(pt(0, 0), 1), Region::ball(pt(1, 0), 1)});
  EXPECT_TRUE(i.contains(pt(0.5, 0)));
  EXPECT_FALSE(i.contains(pt(-0.5, 0)));
  Eigen::Matrix2d a;
  a << 2, 0, 0, 1;
  Region img = Region::affine_image(Region::ball(pt(0, 0), 1), a, pt(5, 0));
  EXPECT_TRUE(img.contains(pt(6.5, 0)));
  EXPECT_FALSE(img.contains(pt(5, 1.5)));
}

TEST(Region, BoundingBoxClipsUnbounded) {
  Box b = Region::full_space(2).bounding_box(3.0);
  EXPECT_DOUBLE_EQ(b.lower[0], -3.0);
  EXPECT_DOUBLE_EQ(b.upper[1], 3.0);
  EXPECT_FALSE(Region::full_space(2).is_bounded());
  EXPECT_TRUE(Region::ball(pt(0, 0), 1).is_bounded());
}

TEST(Region, Connectivity) {
  EXPECT_TRUE(is_connected(Region::ball(pt(0, 0), 1)));
  EXPECT_TRUE(is_connected(Region::annulus(2, 0.4, 0.6)));
  EXPECT_FALSE(is_connected(Region::finite_union({Region::ball(pt(-2, 0), 1), Region::ball(pt(2, 0), 1)})));
  GridLabels labels = label_components(Region::finite_union({Region::ball(pt(-2, 0), 1), Region::ball(pt(2, 0), 1)}));
  EXPECT_EQ(labels.component_count, 2);
}

// For a G-invariant region star-shaped about 0, connectivity of the
// quotient graph forces connectivity of the region. Annuli are G-invariant
// and connected; the pair of half planes under -I is the negative control
// (its quotient is one half plane, the region is two pieces).
TEST(Region, ConnectivityTransferControls) {
  EXPECT_TRUE(is_connected(Region::annulus(2, 0.3, 0.9)));
  Region halves = Region::finite_union({Region::predicate(Region::full_space(2),
                                                          [](const Eigen::VectorXd& x) { return x[0] > 0.2; }, "x>0.2"),
                                        Region::predicate(Region::full_space(2),
                                                          [](const Eigen::VectorXd& x) { return x[0] < -0.2; }, "x<-0.2")});
  EXPECT_FALSE(is_connected(halves));
  Region quotient_half = Region::predicate(Region::full_space(2), [](const Eigen::VectorXd& x) { return x[0] > 0.2; }, "x>0.2");
  EXPECT_TRUE(is_connected(quotient_half));
}

TEST(Region, ComponentRegion) {
  Region two = Region::finite_union({Region::ball(pt(-2, 0), 1), Region::ball(pt(2, 0), 1)});
  auto labels = std::make_shared<const GridLabels>(label_components(two));
  Region c0 = Region::component(two, labels, 0);
  Region c1 = Region::component(two, labels, 1);
  EXPECT_NE(c0.contains(pt(-2, 0)), c1.contains(pt(-2, 0)));
  EXPECT_NE(c0.contains(pt(2, 0)), c1.contains(pt(2, 0)));
  EXPECT_FALSE(c0.contains(pt(0, 0)));
}

TEST(Region, SamplingIsSeededAndInside) {
  Region a = Region::annulus(2, 0.4, 0.6);
  auto s1 = sample_region(a, 100, 7);
  auto s2 = sample_region(a, 100, 7);
  ASSERT_EQ(s1.size(), 100U);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_TRUE(a.contains(s1[i]));
    EXPECT_EQ(s1[i], s2[i]);
  }
  auto s3 = sample_region(a, 100, 8);
  EXPECT_NE(s1[0], s3[0]);
}

TEST(Region, GridIndexRoundTrip) {
  GridSpec g = make_grid(Region::ball(pt(0, 0), 1), 16);
  for (std::size_t i = 0; i < g.size(); i += 7) EXPECT_EQ(g.index(g.coords(i)), i);
}

TEST(Kernels, SerialAndParallelAgree) {
  Region r = Region::finite_union({Region::annulus(2, 0.3, 0.8), Region::ball(pt(1, 1), 0.4)});
  GridSpec grid = make_grid(r, 48);
  EXPECT_EQ(kernels::serial::grid_membership(r, grid), kernels::parallel::grid_membership(r, grid));

  FiniteMatrixGroup g = rotation_group(4);
  auto points = sample_region(Region::ball(pt(0, 0), 2), 300, 1);
  std::vector<Eigen::VectorXd> images;
  for (std::size_t i = 0; i < points.size(); ++i) images.push_back(g.real_element(i % g.order()) * points[i]);
  images[5] = pt(10, 10);
  images[6] = pt(0, 0);
  points[6] = pt(0, 0);
  auto ms = kernels::serial::match_elements(g, points, images, 1e-9);
  EXPECT_EQ(ms, kernels::parallel::match_elements(g, points, images, 1e-9));
  EXPECT_EQ(ms[5], kernels::kNoMatch);
  EXPECT_EQ(ms[6], kernels::kManyMatches);
  EXPECT_EQ(ms[7], 7 % 4);

  MapExpr f = MapExpr::linear(g.real_element(1), Eigen::Vector2d::Zero());
  std::vector<std::size_t> hom(g.order());
  for (std::size_t i = 0; i < g.order(); ++i) hom[i] = i;
  double es = kernels::serial::equivariance_error(f.as_function(), g, g, hom, points);
  double ep = kernels::parallel::equivariance_error(f.as_function(), g, g, hom, points);
  EXPECT_EQ(es, ep);
  EXPECT_LT(es, 1e-12);
}

}  // namespace
}  // namespace orbi
