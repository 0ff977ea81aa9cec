#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "orbi/random.hpp"

namespace orbi {

/// Half-width of the sampling window used for unbounded regions.
inline constexpr double kDefaultWindow = 2.0;
inline constexpr std::size_t kDefaultGridResolution = 64;

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct GridLabels;

/// Open subsets of R^n built from balls, annuli, planar sectors, unions,
/// intersections, affine images, grid components and predicates. Immutable; copies
/// share structure.
class Region {
 public:
  enum class Kind { full_space, ball, annulus, sector, finite_union, intersection, affine_image, component, predicate };

  static Region full_space(std::size_t dim);
  static Region ball(Eigen::VectorXd center, double radius);
  /// Ball in the norm sqrt(v^T gram v).
  static Region gamma_ball(Eigen::VectorXd center, double radius, Eigen::MatrixXd gram);
  /// {inner < |x| < outer} around the origin; inner may be 0 and outer infinite.
  static Region annulus(std::size_t dim, double inner, double outer);
  /// Planar {inner < r < outer, angle in (from, to)} with angles in radians,
  /// measured counterclockwise from `from`.
  static Region sector(double inner, double outer, double from_angle, double to_angle);
  static Region finite_union(std::vector<Region> parts);
  static Region intersection(std::vector<Region> parts);
  /// {a x + b : x in base}.
  static Region affine_image(Region base, Eigen::MatrixXd a, Eigen::VectorXd b);
  /// One grid-connected component of `base`.
  static Region component(Region base, std::shared_ptr<const GridLabels> labels, int label);
  /// Points of `base` accepted by `test`. The description is what describe()
  /// prints for the test.
  static Region predicate(Region base, std::function<bool(const Eigen::VectorXd&)> test, std::string description);

  Kind kind() const;
  std::size_t dim() const;
  bool contains(const Eigen::VectorXd& x) const;
  bool is_bounded() const;

  /// Axis-aligned box containing the region, clipped to [-window, window]^n
  /// in unbounded directions.
  Box bounding_box(double window = kDefaultWindow) const;

  /// A point loops are drawn around: ball/sector/component centers, the
  /// origin for annuli and full space.
  Eigen::VectorXd loop_center() const;

  // Field access for serialization.
  const Eigen::VectorXd& center() const;
  double radius() const;
  double inner() const;
  double outer() const;
  double from_angle() const;
  double to_angle() const;
  const Eigen::MatrixXd& gram() const;
  bool uses_gram() const;
  const std::vector<Region>& parts() const;
  const Eigen::MatrixXd& linear() const;
  const Eigen::VectorXd& offset() const;

  std::string describe() const;

  struct Node;

 private:
  explicit Region(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct GridSpec {
  Eigen::VectorXd lower;
  double spacing = 0;
  std::vector<std::size_t> counts;

  std::size_t size() const;
  Eigen::VectorXd point(std::size_t index) const;
  std::vector<std::size_t> coords(std::size_t index) const;
  std::size_t index(const std::vector<std::size_t>& coords) const;
};

/// Grid over the region's bounding box with spacing = (longest side) /
/// resolution.
GridSpec make_grid(const Region& region, std::size_t resolution = kDefaultGridResolution,
                   double window = kDefaultWindow);

struct GridLabels {
  GridSpec grid;
  std::vector<int> labels;  // -1 outside the region
  int component_count = 0;
};

/// Connected components of the grid points inside the region, adjacency
/// along coordinate axes. Component ids follow grid scan order.
GridLabels label_components(const Region& region, const GridSpec& grid);
GridLabels label_components(const Region& region, std::size_t resolution = kDefaultGridResolution,
                            double window = kDefaultWindow);

bool is_connected(const Region& region, std::size_t resolution = kDefaultGridResolution,
                  double window = kDefaultWindow);

/// Seeded rejection sampling inside the region's bounding box. Throws
/// InvalidArgument when no point is found after many attempts.
std::vector<Eigen::VectorXd> sample_region(const Region& region, std::size_t count, std::uint64_t seed,
                                           double window = kDefaultWindow);

/// Uniform in the box.
Eigen::VectorXd sample_box(const Box& box, Rng& rng);

}  // namespace orbi
