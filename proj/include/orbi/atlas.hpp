#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orbi/group.hpp"
#include "orbi/map_expr.hpp"
#include "orbi/matrix.hpp"
#include "orbi/quotient.hpp"
#include "orbi/region.hpp"

namespace orbi {

enum class AtlasMode { satake, haefliger, diffeological };

std::string to_string(AtlasMode mode);
/// Throws ParseError for an unknown name.
AtlasMode parse_mode(const std::string& text);

/// A local uniformizing system: a connected model region with a finite
/// linear group acting on it.
struct Chart {
  std::string id;
  Region model;
  FiniteMatrixGroup group;
  std::string name;
  /// Set on charts produced by restriction: the chart they came from and
  /// that chart's group, used to move images into the component.
  std::string parent;
  std::optional<FiniteMatrixGroup> ambient;
};

/// Affine injection x -> linear x + offset of `domain` into the target model.
struct Transition {
  std::string from;
  std::string to;
  Region domain;
  Matrix linear;
  Eigen::VectorXd offset;

  MapExpr map() const;
};

/// (from, u) ~ (to, map(u)) for u in the source model (and in `domain` when
/// given). The map need not be injective or equivariant; it must respect
/// orbits.
struct Identification {
  std::string from;
  std::string to;
  MapExpr map;
  std::optional<Region> domain;
};

struct AtlasOptions {
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  std::size_t word_bound = 4;
  std::size_t grid = 64;
};

class Atlas {
 public:
  Atlas(std::string name, std::size_t dim, AtlasMode mode = AtlasMode::satake);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  AtlasMode mode() const noexcept { return mode_; }
  void set_mode(AtlasMode mode) { mode_ = mode; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Throws InvalidArgument on a duplicate id or a dimension mismatch.
  void add_chart(Chart chart);
  void add_transition(Transition t);
  void add_identification(Identification r);

  const std::vector<Chart>& charts() const noexcept { return charts_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const std::vector<Identification>& identifications() const noexcept { return identifications_; }
  bool has_chart(const std::string& id) const;
  std::size_t chart_index(const std::string& id) const;
  const Chart& chart(const std::string& id) const { return charts_[chart_index(id)]; }
  const LinearQuotient& quotient(std::size_t index) const { return *quotients_.at(index); }

  /// Transitions and identifications together, as relations between chart
  /// indices.
  struct Relation {
    std::size_t from = 0;
    std::size_t to = 0;
    MapExpr map;
    std::optional<Region> domain;
  };
  const std::vector<Relation>& relations() const noexcept { return relations_; }

 private:
  std::string name_;
  std::size_t dim_;
  AtlasMode mode_;
  std::vector<Chart> charts_;
  std::vector<Transition> transitions_;
  std::vector<Identification> identifications_;
  std::vector<Relation> relations_;
  std::vector<std::shared_ptr<const LinearQuotient>> quotients_;
};

/// A chart point (chart index, coordinates).
struct AtlasPoint {
  std::size_t chart = 0;
  Eigen::VectorXd u;
};

/// Canonical representatives, in `target`, of every point reachable from
/// (source, u) by at most word_bound relation steps. Search order is
/// deterministic.
std::vector<Eigen::VectorXd> images_in(const Atlas& atlas, std::size_t source, const Eigen::VectorXd& u,
                                       std::size_t target, const AtlasOptions& options = {});
bool same_point(const Atlas& atlas, const AtlasPoint& a, const AtlasPoint& b, const AtlasOptions& options = {});

struct Violation {
  std::string condition;
  std::vector<std::string> subjects;
  std::string witness;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  void merge(const ValidationReport& other);
};

ValidationReport validate_lus(const Chart& chart, AtlasMode mode, const AtlasOptions& options = {});
ValidationReport validate_injection(const Transition& t, const Chart& from, const Chart& to,
                                    const AtlasOptions& options = {});
/// The index in to.group of the unique s with mu = s o lambda on samples.
/// Throws NoFactor otherwise.
std::size_t injection_unique_factor(const Transition& lambda, const Transition& mu, const Chart& to,
                                    const AtlasOptions& options = {});

ValidationReport validate_defining_family(const Atlas& atlas, const AtlasOptions& options = {});
ValidationReport haefliger_compatible(const Atlas& atlas, const std::string& i, const std::string& j,
                                      const AtlasOptions& options = {});
/// Checks for the atlas's own mode: charts, declared transitions and the
/// defining-family conditions (Satake) or pairwise compatibility.
ValidationReport validate(const Atlas& atlas, const AtlasOptions& options = {});

/// Relations between two atlases: forward ones go from a chart of the first
/// to a chart of the second, backward ones the other way.
struct LinkSet {
  std::vector<Identification> forward;
  std::vector<Identification> backward;
};

/// Identity links from every chart to its copy.
LinkSet identity_links(const Atlas& p);
LinkSet reversed(const LinkSet& links);

/// Union of the two atlases glued by the links. When ids collide the
/// charts are renamed "p.<id>" and "q.<id>".
Atlas union_atlas(const Atlas& p, const Atlas& q, const LinkSet& links);
/// Compatibility of every cross pair of the union. Throws
/// IdentificationIncomplete when a chart has no link to the other atlas.
ValidationReport compare_atlases(const Atlas& p, const Atlas& q, const LinkSet& links, const AtlasOptions& options = {});
bool atlases_equivalent(const Atlas& p, const Atlas& q, const LinkSet& links, const AtlasOptions& options = {});

/// Per-chart open subsets, keyed by chart id. Charts without an entry are
/// dropped.
using Selection = std::map<std::string, Region>;

/// The preimage in every chart of `y`, given in the coordinates of
/// `reference`: a chart point belongs when one of its identified points in
/// the reference chart lies in y.
Selection select_by_reference(const Atlas& atlas, const std::string& reference, const Region& y,
                              const AtlasOptions& options = {});
/// Components of model ∩ Y, one per orbit of components, with the subgroup
/// preserving each. New ids are "<id>|<tag>", plus "#k" when a chart splits.
/// Throws EmptyRestriction when nothing is left.
Atlas restrict_family(const Atlas& atlas, const Selection& y, const AtlasOptions& options = {},
                      const std::string& tag = "Y");
/// Identity links between each original chart and the charts restricted
/// from it.
LinkSet restriction_links(const Atlas& original, const Atlas& restricted);
/// The restrictions side by side, glued by the original relations.
Atlas reglue(const Atlas& original, const std::vector<Atlas>& pieces);

/// Stabilizer of u in the chart group. Throws OutOfChart.
FiniteMatrixGroup structure_group_at(const Atlas& atlas, const std::string& chart, const Eigen::VectorXd& u);

/// Sample points of a chart model: the origin and points on fixed lines of
/// group elements when they lie in the model, then seeded random points.
std::vector<Eigen::VectorXd> chart_samples(const Chart& chart, std::size_t count, std::uint64_t seed);

/// "I", "-I" or the row-major entries.
std::string matrix_label(const Eigen::MatrixXd& m);

}  // namespace orbi
