#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orbi/group.hpp"
#include "orbi/map_expr.hpp"
#include "orbi/quotient.hpp"
#include "orbi/region.hpp"

namespace orbi {

struct LiftOptions {
  /// Orbit-matching tolerance, relative to max(1, |point|).
  double tolerance = 1e-7;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  /// Halvings allowed per path step before giving up on a choice.
  std::size_t max_subdivision = 20;
  /// Safety cap on continuation nodes in radial extension.
  std::size_t max_nodes = 20000;
};

/// f : U/G -> U'/G' given by an orbit-valued evaluator: eval(x) returns
/// some point on the image orbit of x.
class QuotientMap {
 public:
  using Evaluator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  QuotientMap(LinearQuotient source, Region source_region, LinearQuotient target, Evaluator eval,
              std::optional<MapExpr> declared_lift = std::nullopt);
  /// The quotient of a map between the models.
  static QuotientMap from_lift(LinearQuotient source, LinearQuotient target, MapExpr lift);

  const LinearQuotient& source() const noexcept { return source_; }
  const LinearQuotient& target() const noexcept { return target_; }
  const Region& source_region() const noexcept { return region_; }
  const std::optional<MapExpr>& declared_lift() const noexcept { return declared_; }

  /// Canonical representative of the image orbit.
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  /// Some point of the image orbit, as the evaluator returns it.
  Eigen::VectorXd raw(const Eigen::VectorXd& x) const;

 private:
  LinearQuotient source_;
  Region region_;
  LinearQuotient target_;
  Evaluator eval_;
  std::optional<MapExpr> declared_;
};

struct PathLift {
  std::vector<Eigen::VectorXd> points;
  /// Every image along the path had trivial stabilizer and every choice
  /// was decisive, so the lift is the only continuous one.
  bool clean = true;
};

/// Continues a lift of f along the path from `seed`, choosing at each point
/// the image-orbit point nearest (target invariant norm) to the predicted
/// continuation. Steps are halved while the choice is unclear.
PathLift path_lift_detailed(const QuotientMap& f, const std::vector<Eigen::VectorXd>& path, const Eigen::VectorXd& seed,
                            const LiftOptions& options = {});
std::vector<Eigen::VectorXd> path_lift(const QuotientMap& f, const std::vector<Eigen::VectorXd>& path,
                                       const Eigen::VectorXd& seed, const LiftOptions& options = {});

/// Straight segment a -> b as `steps` + 1 points.
std::vector<Eigen::VectorXd> segment(const Eigen::VectorXd& a, const Eigen::VectorXd& b, std::size_t steps);
/// Circle of the given radius around c in the plane of coordinates 0, 1.
std::vector<Eigen::VectorXd> circle_loop(const Eigen::VectorXd& c, double radius, std::size_t steps);

/// Index of the target element g' with end = g' * start after lifting the
/// closed loop. A loop not ending at its start is closed automatically.
std::size_t monodromy(const QuotientMap& f, const std::vector<Eigen::VectorXd>& loop, const Eigen::VectorXd& seed,
                      const LiftOptions& options = {});

/// The unique g in G with h(x) = g x on sampled points of U.
std::size_t unique_group_element(const MapExpr& h, const Region& u, const FiniteMatrixGroup& g,
                                 const LiftOptions& options = {});

struct InducedOptions {
  bool require_injective = true;
  LiftOptions lift;
};

/// The homomorphism h with f(g x) = h(g) f(x) on samples of U.
GroupHomomorphism induced_homomorphism(const MapExpr& f, const FiniteMatrixGroup& g, const FiniteMatrixGroup& target,
                                       const Region& u, const InducedOptions& options = {});

struct StabilizerTransport {
  Eigen::MatrixXd jacobian;
  bool ok = false;
};

StabilizerTransport stabilizer_transport(const MapExpr& f, const LinearQuotient& source, const LinearQuotient& target,
                                         const Eigen::VectorXd& u);

/// Sampled lift produced by continuation: nodes with lifted values, plus an
/// optional explicit lift near the origin.
class LiftTable {
 public:
  struct Node {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
  };

  LiftTable(std::shared_ptr<const QuotientMap> f, LiftOptions options);

  void set_core(MapExpr core, double radius);
  std::size_t add(Node node);
  Node& node(std::size_t i) { return nodes_[i]; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t nearest(const Eigen::VectorXd& x) const;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;

 private:
  std::shared_ptr<const QuotientMap> f_;
  LiftOptions options_;
  std::optional<MapExpr> core_;
  double core_radius_ = 0;
  std::vector<Node> nodes_;
};

enum class LiftStatus { lifted, non_liftable, inconclusive };

std::string to_string(LiftStatus s);

/// Equivariance of a lift near one sample: images of the source
/// generators, in generator order.
struct LocalHomomorphism {
  Eigen::VectorXd sample;
  std::vector<std::size_t> generator_images;
};

struct LiftReport {
  LiftStatus status = LiftStatus::inconclusive;
  std::shared_ptr<const LiftTable> lift;
  std::optional<GroupHomomorphism> homomorphism;
  /// Present exactly when status is non_liftable.
  std::optional<std::string> obstruction;
  /// Target element carried around a loop, when that is the obstruction.
  std::optional<std::size_t> monodromy;
  std::vector<LocalHomomorphism> local_homomorphisms;
  std::size_t rounds = 0;
  std::string note;
};

/// Grows a lift outward over spheres of the source invariant norm,
/// starting from `initial` on the ball of radius rho (or, without it, from
/// a canonical seed), until the source region is exhausted.
LiftReport radial_lift_extension(const QuotientMap& f, double rho, std::optional<MapExpr> initial,
                                 const LiftOptions& options = {});

/// Edge of a voltage graph: continuing the value at a to node b lands on
/// g times the value stored at b.
struct VoltageEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t g = 0;
};

struct VoltageSolution {
  /// Per-node group element c with c_b = c_a g along every edge.
  std::vector<std::size_t> correction;
  std::optional<VoltageEdge> violation;
  /// c_b^-1 c_a g on the violated edge.
  std::size_t holonomy = 0;
};

/// Propagates corrections breadth-first from the first `fixed` nodes (held
/// at the identity), then from each remaining unreached node.
VoltageSolution solve_voltages(const FiniteMatrixGroup& g, std::size_t nodes, std::size_t fixed,
                               const std::vector<VoltageEdge>& edges);

/// Extends a generator-image list to a full homomorphism, or nullopt if
/// the relations are violated.
std::optional<GroupHomomorphism> extend_from_generators(const FiniteMatrixGroup& source, const FiniteMatrixGroup& target,
                                                        const std::vector<std::size_t>& generator_images);

}  // namespace orbi
