#include "orbi/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "orbi/conjugacy.hpp"
#include "orbi/error.hpp"
#include "orbi/lifting.hpp"
#include "orbi/random.hpp"
#include "parallel.hpp"

namespace orbi {

namespace {

constexpr double kPointTol = 1e-7;
/// Identified pairs examined per ordered chart pair by the germ search.
constexpr std::size_t kGermSamples = 32;

double scaled(const Eigen::VectorXd& v) { return kPointTol * std::max(1.0, v.norm()); }

std::string point_string(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

std::string to_string(AtlasMode mode) {
  switch (mode) {
    case AtlasMode::satake: return "satake";
    case AtlasMode::haefliger: return "haefliger";
    case AtlasMode::diffeological: return "diffeological";
  }
  return "satake";
}

AtlasMode parse_mode(const std::string& text) {
  if (text == "satake") return AtlasMode::satake;
  if (text == "haefliger") return AtlasMode::haefliger;
  if (text == "diffeological") return AtlasMode::diffeological;
  throw Error(ErrorCode::parse_error, "mode: unknown value '" + text + "'");
}

MapExpr Transition::map() const { return MapExpr::linear(linear.to_real(), offset, domain); }

Atlas::Atlas(std::string name, std::size_t dim, AtlasMode mode) : name_(std::move(name)), dim_(dim), mode_(mode) {
  if (dim == 0) throw Error(ErrorCode::invalid_argument, "atlas dimension must be >= 1");
}

void Atlas::add_chart(Chart chart) {
  if (has_chart(chart.id)) throw Error(ErrorCode::invalid_argument, "duplicate chart id '" + chart.id + "'");
  if (chart.model.dim() != dim_ || chart.group.dim() != dim_) {
    throw Error(ErrorCode::dim_mismatch, "chart '" + chart.id + "' does not match the atlas dimension");
  }
  quotients_.push_back(std::make_shared<const LinearQuotient>(chart.group));
  charts_.push_back(std::move(chart));
}

void Atlas::add_transition(Transition t) {
  const std::size_t a = chart_index(t.from);
  const std::size_t b = chart_index(t.to);
  if (t.linear.rows() != dim_ || t.linear.cols() != dim_ || static_cast<std::size_t>(t.offset.size()) != dim_) {
    throw Error(ErrorCode::dim_mismatch, "transition " + t.from + " -> " + t.to);
  }
  Eigen::MatrixXd a_real = t.linear.to_real();
  relations_.push_back({a, b, t.map(), t.domain});
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a_real);
  if (lu.isInvertible()) {
    // The inverse relation, defined on the image of the domain.
    Eigen::MatrixXd inv = lu.inverse();
    Region image = Region::affine_image(t.domain, a_real, t.offset);
    relations_.push_back({b, a, MapExpr::linear(inv, -inv * t.offset), image});
  }
  transitions_.push_back(std::move(t));
}

void Atlas::add_identification(Identification r) {
  const std::size_t a = chart_index(r.from);
  const std::size_t b = chart_index(r.to);
  if (r.map.in_dim() != dim_ || r.map.out_dim() != dim_) {
    throw Error(ErrorCode::dim_mismatch, "identification " + r.from + " -> " + r.to);
  }
  relations_.push_back({a, b, r.map, r.domain});
  identifications_.push_back(std::move(r));
}

bool Atlas::has_chart(const std::string& id) const {
  return std::any_of(charts_.begin(), charts_.end(), [&](const Chart& c) { return c.id == id; });
}

std::size_t Atlas::chart_index(const std::string& id) const {
  for (std::size_t i = 0; i < charts_.size(); ++i) {
    if (charts_[i].id == id) return i;
  }
  throw Error(ErrorCode::invalid_argument, "unknown chart '" + id + "'");
}

namespace {

struct State {
  std::size_t chart;
  Eigen::VectorXd u;
  std::size_t depth;
};

/// Moves v into the target model, through the ambient group of a restricted
/// chart if needed, and returns its canonical representative.
std::optional<Eigen::VectorXd> land(const Atlas& atlas, std::size_t target, const Eigen::VectorXd& v) {
  const Chart& c = atlas.charts()[target];
  if (c.model.contains(v)) return atlas.quotient(target).canonical_rep_unchecked(v);
  if (c.ambient) {
    for (std::size_t k = 1; k < c.ambient->order(); ++k) {
      Eigen::VectorXd w = c.ambient->real_element(k) * v;
      if (c.model.contains(w)) return atlas.quotient(target).canonical_rep_unchecked(w);
    }
  }
  return std::nullopt;
}

/// Breadth-first search over relation words. `visit` sees every new state
/// and may stop the search by returning true.
void explore(const Atlas& atlas, std::size_t source, const Eigen::VectorXd& u, const AtlasOptions& options,
             const std::function<bool(const State&)>& visit) {
  const Chart& start_chart = atlas.charts()[source];
  if (!start_chart.model.contains(u)) return;
  std::vector<State> seen;
  auto known = [&](std::size_t chart, const Eigen::VectorXd& v) {
    for (const auto& s : seen) {
      if (s.chart == chart && (s.u - v).norm() <= scaled(v)) return true;
    }
    return false;
  };
  seen.push_back({source, atlas.quotient(source).canonical_rep_unchecked(u), 0});
  if (visit(seen.back())) return;
  for (std::size_t head = 0; head < seen.size(); ++head) {
    const State s = seen[head];
    if (s.depth >= options.word_bound) continue;
    const Chart& from = atlas.charts()[s.chart];
    for (const auto& rel : atlas.relations()) {
      if (rel.from != s.chart) continue;
      for (std::size_t g = 0; g < from.group.order(); ++g) {
        Eigen::VectorXd w = from.group.real_element(g) * s.u;
        if (g > 0 && (w - s.u).norm() <= scaled(w)) continue;
        if (!from.model.contains(w)) continue;
        if (rel.domain && !rel.domain->contains(w)) continue;
        Eigen::VectorXd v;
        try {
          v = rel.map(w);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::evaluation_error) throw;
          continue;
        }
        if (!v.allFinite()) continue;
        auto landed = land(atlas, rel.to, v);
        if (!landed || known(rel.to, *landed)) continue;
        seen.push_back({rel.to, *landed, s.depth + 1});
        if (visit(seen.back())) return;
      }
    }
  }
}

std::optional<Eigen::VectorXd> first_image(const Atlas& atlas, std::size_t source, const Eigen::VectorXd& u,
                                           std::size_t target, const AtlasOptions& options) {
  std::optional<Eigen::VectorXd> out;
  explore(atlas, source, u, options, [&](const State& s) {
    if (s.chart != target) return false;
    out = s.u;
    return true;
  });
  return out;
}

/// Charts reached from (source, u), with the states found in each.
std::vector<std::vector<Eigen::VectorXd>> reach(const Atlas& atlas, std::size_t source, const Eigen::VectorXd& u,
                                                const AtlasOptions& options) {
  std::vector<std::vector<Eigen::VectorXd>> out(atlas.charts().size());
  explore(atlas, source, u, options, [&](const State& s) {
    out[s.chart].push_back(s.u);
    return false;
  });
  return out;
}

bool is_diagonal(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && std::abs(m(i, j)) > 1e-12) return false;
    }
  }
  return true;
}

std::string number(double v) {
  if (std::abs(v - std::round(v)) < 1e-12) v = std::round(v);
  std::ostringstream os;
  os.precision(6);
  os << (v == 0 ? 0.0 : v);
  return os.str();
}

}  // namespace

std::vector<Eigen::VectorXd> images_in(const Atlas& atlas, std::size_t source, const Eigen::VectorXd& u,
                                       std::size_t target, const AtlasOptions& options) {
  std::vector<Eigen::VectorXd> out;
  explore(atlas, source, u, options, [&](const State& s) {
    if (s.chart == target) out.push_back(s.u);
    return false;
  });
  return out;
}

bool same_point(const Atlas& atlas, const AtlasPoint& a, const AtlasPoint& b, const AtlasOptions& options) {
  const LinearQuotient& q = atlas.quotient(b.chart);
  Eigen::VectorXd want = q.canonical_rep_unchecked(b.u);
  bool found = false;
  explore(atlas, a.chart, a.u, options, [&](const State& s) {
    found = s.chart == b.chart && (s.u - want).norm() <= scaled(want);
    return found;
  });
  return found;
}

std::string matrix_label(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  if (m.isApprox(Eigen::MatrixXd::Identity(n, n), 1e-12)) return "I";
  if (m.isApprox(-Eigen::MatrixXd::Identity(n, n), 1e-12)) return "-I";
  std::ostringstream os;
  if (is_diagonal(m)) {
    os << "diag(";
    for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << number(m(i, i));
    os << ")";
    return os.str();
  }
  os << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? ",[" : "[");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << number(m(i, j));
    os << "]";
  }
  os << "]";
  return os.str();
}

void ValidationReport::merge(const ValidationReport& other) {
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

std::vector<Eigen::VectorXd> chart_samples(const Chart& chart, std::size_t count, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  const auto n = static_cast<Eigen::Index>(chart.model.dim());
  auto add = [&](const Eigen::VectorXd& p) {
    if (!chart.model.contains(p)) return;
    for (const auto& q : out) {
      if ((q - p).norm() < 1e-12) return;
    }
    out.push_back(p);
  };
  add(Eigen::VectorXd::Zero(n));
  Box box = chart.model.bounding_box();
  const double reach = 0.5 * (box.upper - box.lower).maxCoeff();
  for (std::size_t g = 1; g < chart.group.order() && out.size() < 8; ++g) {
    Eigen::MatrixXd m = chart.group.real_element(g) - Eigen::MatrixXd::Identity(n, n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-9);
    Eigen::MatrixXd kernel = lu.kernel();
    if (lu.rank() == 0 || lu.rank() == n) continue;
    for (Eigen::Index c = 0; c < kernel.cols() && c < 2; ++c) {
      Eigen::VectorXd b = kernel.col(c).normalized();
      for (double t : {0.3, -0.3, 0.6, -0.6}) add(t * reach * b);
    }
  }
  if (count > 0) {
    auto rest = sample_region(chart.model, count, seed);
    out.insert(out.end(), rest.begin(), rest.end());
  }
  return out;
}

ValidationReport validate_lus(const Chart& chart, AtlasMode mode, const AtlasOptions& options) {
  ValidationReport report;
  GridLabels labels = label_components(chart.model, std::max<std::size_t>(options.grid, 8));
  if (labels.component_count != 1) {
    report.violations.push_back({"l.u.s.: model not connected",
                                 {chart.id},
                                 std::to_string(labels.component_count) + " grid components"});
  }
  if (mode == AtlasMode::satake) {
    for (std::size_t g = 1; g < chart.group.order(); ++g) {
      if (is_reflection(chart.group.element(g))) {
        report.violations.push_back(
            {"reflection present: " + matrix_label(chart.group.real_element(g)), {chart.id}, ""});
      }
    }
  }
  if (labels.component_count >= 1) {
    for (const auto& u : sample_region(chart.model, std::min<std::size_t>(options.samples, 64), options.seed)) {
      for (std::size_t g = 1; g < chart.group.order(); ++g) {
        Eigen::VectorXd w = chart.group.real_element(g) * u;
        if (!chart.model.contains(w)) {
          report.violations.push_back({"l.u.s.: model not invariant", {chart.id}, point_string(u)});
          return report;
        }
      }
    }
  }
  return report;
}

namespace {

std::optional<std::size_t> orbit_match(const FiniteMatrixGroup& g, const Eigen::VectorXd& from,
                                       const Eigen::VectorXd& to) {
  for (std::size_t k = 0; k < g.order(); ++k) {
    if ((g.real_element(k) * from - to).norm() <= scaled(to)) return k;
  }
  return std::nullopt;
}

std::vector<Eigen::VectorXd> transition_samples(const Transition& t, const Chart& from, const AtlasOptions& options) {
  Region where = Region::intersection({from.model, t.domain});
  try {
    return sample_region(where, options.samples, options.seed);
  } catch (const Error&) {
    return {};
  }
}

}  // namespace

ValidationReport validate_injection(const Transition& t, const Chart& from, const Chart& to,
                                    const AtlasOptions& options) {
  ValidationReport report;
  const std::vector<std::string> ids{t.from, t.to};
  Eigen::MatrixXd a = t.linear.to_real();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    report.violations.push_back({"injection: linear part singular", ids, matrix_label(a)});
    return report;
  }
  Eigen::MatrixXd inv = lu.inverse();
  auto lambda = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd { return a * u + t.offset; };
  auto xs = transition_samples(t, from, options);
  if (xs.empty()) {
    report.violations.push_back({"injection: empty domain", ids, t.domain.describe()});
    return report;
  }
  for (const auto& u : xs) {
    Eigen::VectorXd y = lambda(u);
    if (!to.model.contains(y)) {
      report.violations.push_back({"injection: image outside target", ids, point_string(u)});
      return report;
    }
    // Source orbit maps into one target orbit.
    for (std::size_t g = 1; g < from.group.order(); ++g) {
      Eigen::VectorXd gu = from.group.real_element(g) * u;
      if (!t.domain.contains(gu)) continue;
      if (!orbit_match(to.group, y, lambda(gu))) {
        report.violations.push_back({"injection: orbit not preserved", ids, point_string(u)});
        return report;
      }
    }
    // Distinct source orbits stay distinct.
    for (std::size_t h = 1; h < to.group.order(); ++h) {
      Eigen::VectorXd v = inv * (to.group.real_element(h) * y - t.offset);
      if (!t.domain.contains(v) || !from.model.contains(v)) continue;
      if (!orbit_match(from.group, u, v)) {
        report.violations.push_back({"injection: identifies distinct orbits", ids, point_string(u)});
        return report;
      }
    }
  }
  return report;
}

std::size_t injection_unique_factor(const Transition& lambda, const Transition& mu, const Chart& to,
                                    const AtlasOptions& options) {
  if (lambda.from != mu.from || lambda.to != mu.to || lambda.to != to.id) {
    throw Error(ErrorCode::invalid_argument, "injections do not share source and target");
  }
  Region where = Region::intersection({lambda.domain, mu.domain});
  std::vector<Eigen::VectorXd> xs;
  try {
    xs = sample_region(where, options.samples, options.seed);
  } catch (const Error&) {
    throw Error(ErrorCode::no_factor, "injections have disjoint domains");
  }
  Eigen::MatrixXd a = lambda.linear.to_real();
  Eigen::MatrixXd b = mu.linear.to_real();
  std::vector<char> alive(to.group.order(), 1);
  for (const auto& u : xs) {
    Eigen::VectorXd l = a * u + lambda.offset;
    Eigen::VectorXd m = b * u + mu.offset;
    for (std::size_t s = 0; s < to.group.order(); ++s) {
      if (alive[s] && (to.group.real_element(s) * l - m).norm() > scaled(m)) alive[s] = 0;
    }
  }
  std::vector<std::size_t> left;
  for (std::size_t s = 0; s < alive.size(); ++s) {
    if (alive[s]) left.push_back(s);
  }
  if (left.size() != 1) {
    throw Error(ErrorCode::no_factor, left.empty() ? "no group element relates the injections"
                                                   : "several group elements relate the injections");
  }
  return left.front();
}

FiniteMatrixGroup structure_group_at(const Atlas& atlas, const std::string& chart, const Eigen::VectorXd& u) {
  const Chart& c = atlas.chart(chart);
  if (static_cast<std::size_t>(u.size()) != atlas.dim() || !c.model.contains(u)) {
    throw Error(ErrorCode::out_of_chart, point_string(u) + " is not in chart '" + chart + "'");
  }
  return stabilizer(c.group, u, kPointTol);
}

namespace {

struct InjectionSearch {
  bool found = false;
  std::string method;
  std::string failure;
  std::string witness;
};

QuotientMap chart_map(const Atlas& atlas, std::size_t i, std::size_t j, const AtlasOptions& options) {
  const Atlas* a = &atlas;
  return QuotientMap(atlas.quotient(i), atlas.charts()[i].model, atlas.quotient(j),
                     [a, i, j, options](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                       auto y = first_image(*a, i, x, j, options);
                       if (!y) throw Error(ErrorCode::evaluation_error, "point has no image in the chart");
                       return *y;
                     });
}

bool singular(const Eigen::MatrixXd& j, double ratio) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  const auto& s = svd.singularValues();
  return !(s.minCoeff() > ratio * s.maxCoeff());
}

/// An affine map x -> a x + b matching the chart map on every sample and
/// keeping distinct orbits apart.
bool affine_fits(const Atlas& atlas, std::size_t i, std::size_t j, const QuotientMap& f, const Eigen::MatrixXd& a,
                 const Eigen::VectorXd& b, const std::vector<Eigen::VectorXd>& xs) {
  const Chart& from = atlas.charts()[i];
  const Chart& to = atlas.charts()[j];
  if (singular(a, 1e-8)) return false;
  Eigen::MatrixXd inv = a.inverse();
  for (const auto& u : xs) {
    Eigen::VectorXd y = a * u + b;
    if (!to.model.contains(y)) return false;
    Eigen::VectorXd target;
    try {
      target = f(u);
    } catch (const Error&) {
      return false;
    }
    bool hit = false;
    for (std::size_t g = 0; g < to.group.order() && !hit; ++g) {
      hit = (to.group.real_element(g) * y - target).norm() <= 1e-6 * std::max(1.0, y.norm());
    }
    if (!hit) return false;
    for (std::size_t h = 1; h < to.group.order(); ++h) {
      Eigen::VectorXd v = inv * (to.group.real_element(h) * y - b);
      if (!from.model.contains(v)) continue;
      if (!orbit_match(from.group, u, v)) return false;
    }
  }
  return true;
}

InjectionSearch search_declared(const Atlas& atlas, std::size_t i, std::size_t j, const std::vector<Eigen::VectorXd>& xs,
                                const AtlasOptions& options) {
  const Chart& from = atlas.charts()[i];
  const Chart& to = atlas.charts()[j];
  for (const auto& t : atlas.transitions()) {
    if (t.from != from.id || t.to != to.id) continue;
    bool covers = std::all_of(xs.begin(), xs.end(), [&](const Eigen::VectorXd& u) { return t.domain.contains(u); });
    if (covers && validate_injection(t, from, to, options).ok()) return {true, "declared", "", ""};
  }
  return {};
}

InjectionSearch search_affine(const Atlas& atlas, std::size_t i, std::size_t j, const QuotientMap& f,
                              const std::vector<Eigen::VectorXd>& xs) {
  const Chart& from = atlas.charts()[i];
  const Chart& to = atlas.charts()[j];
  const auto n = static_cast<Eigen::Index>(atlas.dim());
  for (const auto& x0 : xs) {
    if (stabilizer_indices(from.group, x0, kPointTol).size() != 1) continue;
    Eigen::VectorXd y0;
    try {
      y0 = f(x0);
    } catch (const Error&) {
      continue;
    }
    if (stabilizer_indices(to.group, y0, kPointTol).size() != 1) continue;
    double h = 1e-5 * std::max(1.0, x0.norm());
    Eigen::MatrixXd jac(n, n);
    bool ok = true;
    for (Eigen::Index k = 0; k < n && ok; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(n, k) * h;
      if (!from.model.contains(x0 + e) || !from.model.contains(x0 - e)) {
        ok = false;
        break;
      }
      try {
        Eigen::VectorXd yp = path_lift(f, segment(x0, x0 + e, 1), y0).back();
        Eigen::VectorXd ym = path_lift(f, segment(x0, x0 - e, 1), y0).back();
        jac.col(k) = (yp - ym) / (2 * h);
      } catch (const Error&) {
        ok = false;
      }
    }
    if (!ok) continue;
    Eigen::VectorXd b = y0 - jac * x0;
    if (affine_fits(atlas, i, j, f, jac, b, xs)) return {true, "affine", "", ""};
    // One seed decides: a smooth injection is affine everywhere or nowhere.
    return {};
  }
  return {};
}

InjectionSearch search_continuation(const Atlas& atlas, std::size_t i, std::size_t j,
                                    std::shared_ptr<const QuotientMap> f, const AtlasOptions& options) {
  const Chart& from = atlas.charts()[i];
  const FiniteMatrixGroup& tg = atlas.charts()[j].group;
  const std::size_t res = std::max<std::size_t>(16, options.grid / 2);
  GridLabels labels = label_components(from.model, res);
  const GridSpec& grid = labels.grid;
  const std::size_t dim = atlas.dim();
  LiftOptions lo;
  lo.seed = options.seed;

  // Root: the labelled grid point nearest the model's loop center whose
  // image is defined.
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (labels.labels[k] >= 0) order.push_back(k);
  }
  if (order.size() < 2) return {false, "", "no injection found in search class", "model too small for the grid"};
  Eigen::VectorXd center = from.model.loop_center();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return (grid.point(a) - center).squaredNorm() < (grid.point(b) - center).squaredNorm();
  });

  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> slot(grid.size(), none);
  std::vector<Eigen::VectorXd> xs, ys;
  std::vector<VoltageEdge> edges;
  std::vector<std::pair<std::size_t, std::size_t>> tree;

  auto neighbours = [&](std::size_t k) {
    std::vector<std::size_t> out;
    auto c = grid.coords(k);
    for (std::size_t d = 0; d < dim; ++d) {
      for (int step : {-1, 1}) {
        auto cc = c;
        if (step < 0 && cc[d] == 0) continue;
        if (step > 0 && cc[d] + 1 >= grid.counts[d]) continue;
        cc[d] = step < 0 ? cc[d] - 1 : cc[d] + 1;
        std::size_t m = grid.index(cc);
        if (labels.labels[m] == labels.labels[k]) out.push_back(m);
      }
    }
    return out;
  };

  for (std::size_t root : order) {
    if (slot[root] != none) continue;
    Eigen::VectorXd x = grid.point(root);
    Eigen::VectorXd y;
    try {
      y = (*f)(x);
    } catch (const Error&) {
      continue;
    }
    slot[root] = xs.size();
    xs.push_back(x);
    ys.push_back(y);
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      std::size_t k = queue.front();
      queue.pop_front();
      for (std::size_t m : neighbours(k)) {
        if (slot[m] != none) continue;
        Eigen::VectorXd xm = grid.point(m);
        try {
          PathLift pl = path_lift_detailed(*f, segment(xs[slot[k]], xm, 2), ys[slot[k]], lo);
          slot[m] = xs.size();
          xs.push_back(xm);
          ys.push_back(pl.points.back());
          if (pl.clean) edges.push_back({slot[k], slot[m], 0});
          tree.emplace_back(k, m);
          queue.push_back(m);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::invalid_argument) throw;
        }
      }
    }
  }
  if (xs.size() < 2) return {false, "", "no injection found in search class", "chart map undefined on the grid"};

  // Every other grid edge closes a loop; its continuation must agree.
  std::set<std::pair<std::size_t, std::size_t>> tree_set;
  for (auto [a, b] : tree) tree_set.insert({std::min(a, b), std::max(a, b)});
  std::vector<std::pair<std::size_t, std::size_t>> rest;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (slot[k] == none) continue;
    for (std::size_t m : neighbours(k)) {
      if (m <= k || slot[m] == none || tree_set.count({k, m})) continue;
      rest.emplace_back(k, m);
    }
  }
  std::vector<std::optional<VoltageEdge>> found(rest.size());
  detail::parallel_for(rest.size(), [&](std::size_t e) {
    const std::size_t a = slot[rest[e].first];
    const std::size_t b = slot[rest[e].second];
    try {
      PathLift pl = path_lift_detailed(*f, segment(xs[a], xs[b], 2), ys[a], lo);
      if (!pl.clean) return;
      auto g = orbit_match(tg, ys[b], pl.points.back());
      if (g) found[e] = VoltageEdge{a, b, *g};
    } catch (const Error& err) {
      if (err.code() == ErrorCode::invalid_argument) throw;
    }
  });
  for (const auto& e : found) {
    if (e) edges.push_back(*e);
  }
  VoltageSolution sol = solve_voltages(tg, xs.size(), 1, edges);
  if (sol.violation) {
    return {false, "", "no injection (monodromy " + matrix_label(tg.real_element(sol.holonomy)) + ")",
            "loop through " + point_string(xs[sol.violation->a]) + " and " + point_string(xs[sol.violation->b])};
  }
  for (std::size_t k = 0; k < ys.size(); ++k) ys[k] = tg.real_element(sol.correction[k]) * ys[k];

  auto table = std::make_shared<LiftTable>(f, lo);
  for (std::size_t k = 0; k < xs.size(); ++k) table->add({xs[k], ys[k]});
  const std::size_t stride = std::max<std::size_t>(1, xs.size() / 200);

  // Injective on group orbits.
  for (std::size_t k = 0; k < xs.size(); k += stride) {
    for (std::size_t g = 1; g < from.group.order(); ++g) {
      Eigen::VectorXd gx = from.group.real_element(g) * xs[k];
      if ((gx - xs[k]).norm() <= grid.spacing) continue;
      Eigen::VectorXd lg;
      try {
        lg = (*table)(gx);
      } catch (const Error&) {
        continue;
      }
      if ((lg - ys[k]).norm() <= 1e-6 * std::max(1.0, ys[k].norm())) {
        return {false, "", "lift not injective", point_string(xs[k]) + " and " + point_string(gx)};
      }
    }
  }
  // Injective on the grid.
  const std::size_t pair_stride = std::max<std::size_t>(1, xs.size() / 400);
  for (std::size_t a = 0; a < xs.size(); a += pair_stride) {
    for (std::size_t b = a + pair_stride; b < xs.size(); b += pair_stride) {
      if ((xs[a] - xs[b]).norm() > 1.5 * grid.spacing &&
          (ys[a] - ys[b]).norm() <= 1e-6 * std::max(1.0, ys[a].norm())) {
        return {false, "", "lift not injective", point_string(xs[a]) + " and " + point_string(xs[b])};
      }
    }
  }
  // Local diffeomorphism.
  const auto n = static_cast<Eigen::Index>(dim);
  const double h = 0.1 * grid.spacing;
  const std::size_t jac_stride = std::max<std::size_t>(1, xs.size() / 16);
  for (std::size_t k = 0; k < xs.size(); k += jac_stride) {
    Eigen::MatrixXd jac(n, n);
    bool ok = true;
    for (Eigen::Index d = 0; d < n && ok; ++d) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(n, d) * h;
      if (!from.model.contains(xs[k] + e) || !from.model.contains(xs[k] - e)) {
        ok = false;
        break;
      }
      try {
        jac.col(d) = ((*table)(xs[k] + e) - (*table)(xs[k] - e)) / (2 * h);
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok && singular(jac, 1e-6)) return {false, "", "lift not a local diffeomorphism", point_string(xs[k])};
  }
  return {true, "continuation", "", ""};
}

InjectionSearch find_injection(const Atlas& atlas, std::size_t i, std::size_t j, const AtlasOptions& options) {
  const Chart& from = atlas.charts()[i];
  std::vector<Eigen::VectorXd> xs = sample_region(from.model, std::min<std::size_t>(options.samples, 64), options.seed);
  if (auto r = search_declared(atlas, i, j, xs, options); r.found) return r;
  auto f = std::make_shared<const QuotientMap>(chart_map(atlas, i, j, options));
  if (auto r = search_affine(atlas, i, j, *f, xs); r.found) return r;
  return search_continuation(atlas, i, j, f, options);
}

struct Reach {
  std::vector<std::vector<Eigen::VectorXd>> samples;  // per chart
  /// reached[i][s][j]: sample s of chart i has an image in chart j.
  std::vector<std::vector<std::vector<char>>> reached;
};

Reach compute_reach(const Atlas& atlas, std::size_t count, const AtlasOptions& options) {
  const std::size_t n = atlas.charts().size();
  Reach r;
  r.samples.resize(n);
  r.reached.resize(n);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    r.samples[i] = chart_samples(atlas.charts()[i], count, options.seed + i);
    r.reached[i].assign(r.samples[i].size(), std::vector<char>(n, 0));
    for (std::size_t s = 0; s < r.samples[i].size(); ++s) jobs.emplace_back(i, s);
  }
  detail::parallel_for(jobs.size(), [&](std::size_t k) {
    auto [i, s] = jobs[k];
    auto per_chart = reach(atlas, i, r.samples[i][s], options);
    for (std::size_t j = 0; j < n; ++j) r.reached[i][s][j] = per_chart[j].empty() ? 0 : 1;
  });
  return r;
}

}  // namespace

ValidationReport validate_defining_family(const Atlas& atlas, const AtlasOptions& options) {
  ValidationReport report;
  const std::size_t n = atlas.charts().size();
  if (n == 0) return report;
  Reach r = compute_reach(atlas, options.samples, options);

  // contained[k][i]: the image of chart k lies in the image of chart i.
  std::vector<std::vector<char>> contained(n, std::vector<char>(n, 0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      contained[k][i] = k == i || std::all_of(r.reached[k].begin(), r.reached[k].end(),
                                              [&](const std::vector<char>& row) { return row[i] != 0; });
    }
  }

  // (1): a point in two images lies in the image of a chart inside both.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<char> reported(n, 0);
    for (std::size_t s = 0; s < r.samples[i].size(); ++s) {
      const auto& row = r.reached[i][s];
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !row[j] || reported[j]) continue;
        bool refined = false;
        for (std::size_t k = 0; k < n && !refined; ++k) refined = row[k] && contained[k][i] && contained[k][j];
        if (!refined) {
          reported[j] = 1;
          report.violations.push_back({"condition (1): no refinement",
                                       {atlas.charts()[i].id, atlas.charts()[j].id},
                                       point_string(r.samples[i][s])});
        }
      }
    }
  }

  // (2): every containment is realized by an injection.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && contained[i][j]) pairs.emplace_back(i, j);
    }
  }
  std::vector<InjectionSearch> results(pairs.size());
  detail::parallel_for(pairs.size(), [&](std::size_t k) { results[k] = find_injection(atlas, pairs[k].first, pairs[k].second, options); });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (results[k].found) continue;
    report.violations.push_back({"condition (2): " + results[k].failure,
                                 {atlas.charts()[pairs[k].first].id, atlas.charts()[pairs[k].second].id},
                                 results[k].witness});
  }
  return report;
}

namespace {

/// A local diffeomorphism germ from chart i at u to chart j at v, found
/// from image probes in the coordinate directions; nullopt when found or
/// when the probes leave the overlap.
std::optional<std::string> germ_failure(const Atlas& atlas, std::size_t i, std::size_t j, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& v, const AtlasOptions& options) {
  const Chart& ci = atlas.charts()[i];
  const FiniteMatrixGroup& gj = atlas.charts()[j].group;
  auto si = stabilizer_indices(ci.group, u, kPointTol);
  auto sj = stabilizer_indices(gj, v, kPointTol);
  if (si.size() != sj.size()) {
    return "stabilizer mismatch: orders " + std::to_string(si.size()) + " vs " + std::to_string(sj.size());
  }
  const auto n = static_cast<Eigen::Index>(atlas.dim());
  std::vector<Eigen::VectorXd> dirs;
  for (Eigen::Index k = 0; k < n; ++k) dirs.push_back(Eigen::VectorXd::Unit(n, k));
  Rng rng(options.seed + 7919);
  for (int m = 0; m < 3; ++m) {
    Eigen::VectorXd d(n);
    for (Eigen::Index k = 0; k < n; ++k) d[k] = rng.uniform(-1, 1);
    dirs.push_back(d.normalized());
  }

  double delta = 1e-4 * std::max(1.0, u.norm());
  std::vector<std::vector<Eigen::VectorXd>> cands;
  bool probed = false;
  for (int attempt = 0; attempt < 6 && !probed; ++attempt, delta /= 4) {
    cands.assign(dirs.size(), {});
    probed = true;
    for (std::size_t d = 0; d < dirs.size() && probed; ++d) {
      Eigen::VectorXd p = u + delta * dirs[d];
      if (!ci.model.contains(p)) {
        probed = false;
        break;
      }
      for (const auto& w : images_in(atlas, i, p, j, options)) {
        for (std::size_t g = 0; g < gj.order(); ++g) {
          Eigen::VectorXd c = gj.real_element(g) * w;
          if ((c - v).norm() <= 1e3 * delta) cands[d].push_back(c);
        }
      }
      probed = !cands[d].empty();
    }
    if (probed) break;
  }
  if (!probed) return std::nullopt;

  const auto axes = static_cast<std::size_t>(n);
  std::size_t combos = 1;
  for (std::size_t k = 0; k < axes; ++k) combos *= cands[k].size();
  combos = std::min<std::size_t>(combos, 1 << 16);
  for (std::size_t c = 0; c < combos; ++c) {
    Eigen::MatrixXd a(n, n);
    std::size_t rest = c;
    for (std::size_t k = 0; k < axes; ++k) {
      a.col(static_cast<Eigen::Index>(k)) = (cands[k][rest % cands[k].size()] - v) / delta;
      rest /= cands[k].size();
    }
    if (singular(a, 1e-6)) continue;
    Eigen::MatrixXd inv = a.inverse();
    bool ok = true;
    for (std::size_t s : si) {
      auto img = gj.find_real(a * ci.group.real_element(s) * inv, 1e-3);
      if (!img || std::find(sj.begin(), sj.end(), *img) == sj.end()) {
        ok = false;
        break;
      }
    }
    const double slack = 0.1 * delta * std::max(1.0, a.norm());
    for (std::size_t d = axes; d < dirs.size() && ok; ++d) {
      Eigen::VectorXd want = v + delta * (a * dirs[d]);
      ok = std::any_of(cands[d].begin(), cands[d].end(),
                       [&](const Eigen::VectorXd& q) { return (q - want).norm() <= slack; });
    }
    if (ok) return std::nullopt;
  }
  return std::string("no germ");
}

}  // namespace

namespace {

/// Sample points of chart i and, per sample, the states reached in every
/// chart.
struct SampleReach {
  std::vector<Eigen::VectorXd> xs;
  std::vector<std::vector<std::vector<Eigen::VectorXd>>> images;
};

SampleReach sample_reach(const Atlas& atlas, std::size_t i, const AtlasOptions& options) {
  SampleReach out;
  out.xs = chart_samples(atlas.charts()[i], options.samples, options.seed + i);
  out.images.resize(out.xs.size());
  detail::parallel_for(out.xs.size(), [&](std::size_t k) { out.images[k] = reach(atlas, i, out.xs[k], options); });
  return out;
}

ValidationReport compatible_on(const Atlas& atlas, std::size_t i, std::size_t j, const SampleReach& sr,
                               const AtlasOptions& options) {
  struct Pair {
    std::size_t sample;
    Eigen::VectorXd v;
  };
  std::vector<Pair> pairs;
  for (std::size_t k = 0; k < sr.xs.size() && pairs.size() < kGermSamples; ++k) {
    for (const auto& v : sr.images[k][j]) pairs.push_back({k, v});
  }
  std::vector<std::optional<std::string>> failures(pairs.size());
  detail::parallel_for(pairs.size(), [&](std::size_t k) {
    failures[k] = germ_failure(atlas, i, j, sr.xs[pairs[k].sample], pairs[k].v, options);
  });
  ValidationReport report;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!failures[k]) continue;
    report.violations.push_back({"compatibility: " + *failures[k],
                                 {atlas.charts()[i].id, atlas.charts()[j].id},
                                 point_string(sr.xs[pairs[k].sample]) + " ~ " + point_string(pairs[k].v)});
  }
  return report;
}

}  // namespace

ValidationReport haefliger_compatible(const Atlas& atlas, const std::string& i_id, const std::string& j_id,
                                      const AtlasOptions& options) {
  const std::size_t i = atlas.chart_index(i_id);
  const std::size_t j = atlas.chart_index(j_id);
  return compatible_on(atlas, i, j, sample_reach(atlas, i, options), options);
}

ValidationReport validate(const Atlas& atlas, const AtlasOptions& options) {
  ValidationReport report;
  for (const auto& c : atlas.charts()) report.merge(validate_lus(c, atlas.mode(), options));
  for (const auto& t : atlas.transitions()) {
    report.merge(validate_injection(t, atlas.chart(t.from), atlas.chart(t.to), options));
  }
  if (atlas.mode() == AtlasMode::satake) {
    report.merge(validate_defining_family(atlas, options));
    return report;
  }
  const std::size_t n = atlas.charts().size();
  Reach r = compute_reach(atlas, std::min<std::size_t>(options.samples, 32), options);
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<SampleReach> sr;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool overlap = std::any_of(r.reached[i].begin(), r.reached[i].end(),
                                 [&](const std::vector<char>& row) { return row[j] != 0; });
      if (!overlap) continue;
      if (!sr) sr = sample_reach(atlas, i, options);
      report.merge(compatible_on(atlas, i, j, *sr, options));
    }
  }
  return report;
}

LinkSet identity_links(const Atlas& p) {
  LinkSet out;
  for (const auto& c : p.charts()) {
    out.forward.push_back({c.id, c.id, MapExpr::identity(p.dim()), std::nullopt});
    out.backward.push_back({c.id, c.id, MapExpr::identity(p.dim()), std::nullopt});
  }
  return out;
}

LinkSet reversed(const LinkSet& links) { return {links.backward, links.forward}; }

namespace {

bool ids_collide(const Atlas& p, const Atlas& q) {
  return std::any_of(p.charts().begin(), p.charts().end(), [&](const Chart& c) { return q.has_chart(c.id); });
}

void copy_into(Atlas& out, const Atlas& src, const std::string& prefix) {
  for (Chart c : src.charts()) {
    c.id = prefix + c.id;
    out.add_chart(std::move(c));
  }
  for (Transition t : src.transitions()) {
    t.from = prefix + t.from;
    t.to = prefix + t.to;
    out.add_transition(std::move(t));
  }
  for (Identification r : src.identifications()) {
    r.from = prefix + r.from;
    r.to = prefix + r.to;
    out.add_identification(std::move(r));
  }
}

void check_links(const Atlas& p, const Atlas& q, const LinkSet& links) {
  for (const auto& c : p.charts()) {
    bool linked = std::any_of(links.forward.begin(), links.forward.end(), [&](const Identification& r) { return r.from == c.id; }) ||
                  std::any_of(links.backward.begin(), links.backward.end(), [&](const Identification& r) { return r.to == c.id; });
    if (!linked) throw Error(ErrorCode::identification_incomplete, "chart '" + c.id + "' of " + p.name() + " has no link");
  }
  for (const auto& c : q.charts()) {
    bool linked = std::any_of(links.forward.begin(), links.forward.end(), [&](const Identification& r) { return r.to == c.id; }) ||
                  std::any_of(links.backward.begin(), links.backward.end(), [&](const Identification& r) { return r.from == c.id; });
    if (!linked) throw Error(ErrorCode::identification_incomplete, "chart '" + c.id + "' of " + q.name() + " has no link");
  }
}

}  // namespace

Atlas union_atlas(const Atlas& p, const Atlas& q, const LinkSet& links) {
  if (p.dim() != q.dim()) throw Error(ErrorCode::dim_mismatch, "atlases of different dimension");
  const bool rename = ids_collide(p, q);
  const std::string pp = rename ? "p." : "";
  const std::string qp = rename ? "q." : "";
  Atlas out(p.name() + "-union-" + q.name(), p.dim(), p.mode());
  copy_into(out, p, pp);
  copy_into(out, q, qp);
  for (Identification r : links.forward) {
    r.from = pp + r.from;
    r.to = qp + r.to;
    out.add_identification(std::move(r));
  }
  for (Identification r : links.backward) {
    r.from = qp + r.from;
    r.to = pp + r.to;
    out.add_identification(std::move(r));
  }
  return out;
}

ValidationReport compare_atlases(const Atlas& p, const Atlas& q, const LinkSet& links, const AtlasOptions& options) {
  check_links(p, q, links);
  Atlas u = union_atlas(p, q, links);
  const std::size_t np = p.charts().size();
  const std::size_t n = u.charts().size();
  std::vector<SampleReach> sr(n);
  for (std::size_t i = 0; i < n; ++i) sr[i] = sample_reach(u, i, options);
  ValidationReport report;
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = np; b < n; ++b) {
      report.merge(compatible_on(u, a, b, sr[a], options));
      report.merge(compatible_on(u, b, a, sr[b], options));
    }
  }
  return report;
}

bool atlases_equivalent(const Atlas& p, const Atlas& q, const LinkSet& links, const AtlasOptions& options) {
  return compare_atlases(p, q, links, options).ok();
}

Selection select_by_reference(const Atlas& atlas, const std::string& reference, const Region& y,
                              const AtlasOptions& options) {
  const std::size_t ref = atlas.chart_index(reference);
  if (y.dim() != atlas.dim()) throw Error(ErrorCode::dim_mismatch, "selection region");
  auto shared = std::make_shared<const Atlas>(atlas);
  Selection out;
  for (std::size_t i = 0; i < atlas.charts().size(); ++i) {
    auto test = [shared, i, ref, y, options](const Eigen::VectorXd& x) {
      const FiniteMatrixGroup& g = shared->charts()[ref].group;
      bool hit = false;
      explore(*shared, i, x, options, [&](const State& s) {
        if (s.chart != ref) return false;
        for (std::size_t k = 0; k < g.order() && !hit; ++k) hit = y.contains(g.real_element(k) * s.u);
        return hit;
      });
      return hit;
    };
    out.emplace(atlas.charts()[i].id,
                Region::predicate(atlas.charts()[i].model, test, "preimage[" + reference + ":" + y.describe() + "]"));
  }
  return out;
}

Atlas restrict_family(const Atlas& atlas, const Selection& y, const AtlasOptions& options, const std::string& tag) {
  Atlas out(atlas.name() + "|" + tag, atlas.dim(), atlas.mode());
  std::vector<std::vector<std::string>> children(atlas.charts().size());
  for (std::size_t i = 0; i < atlas.charts().size(); ++i) {
    const Chart& c = atlas.charts()[i];
    auto it = y.find(c.id);
    if (it == y.end()) continue;
    Region cut = Region::intersection({c.model, it->second});
    auto labels = std::make_shared<GridLabels>(label_components(cut, std::max<std::size_t>(options.grid, 8)));
    if (labels->component_count == 0) continue;
    const auto count = static_cast<std::size_t>(labels->component_count);
    std::vector<Region> parts;
    std::vector<Eigen::VectorXd> reps;
    for (std::size_t k = 0; k < count; ++k) {
      parts.push_back(count == 1 ? cut : Region::component(cut, labels, static_cast<int>(k)));
      reps.push_back(parts.back().loop_center());
      if (!parts.back().contains(reps.back())) {
        for (std::size_t g = 0; g < labels->grid.size(); ++g) {
          if (labels->labels[g] == static_cast<int>(k)) {
            reps.back() = labels->grid.point(g);
            break;
          }
        }
      }
    }
    auto component_of = [&](const Eigen::VectorXd& x) -> std::optional<std::size_t> {
      for (std::size_t k = 0; k < count; ++k) {
        if (parts[k].contains(x)) return k;
      }
      return std::nullopt;
    };
    // Components related by the group are one chart; keep the one holding
    // the canonical representative of the first member.
    std::vector<std::size_t> orbit_of(count, count);
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < count; ++k) {
      if (orbit_of[k] != count) continue;
      for (std::size_t g = 0; g < c.group.order(); ++g) {
        if (auto m = component_of(c.group.real_element(g) * reps[k])) orbit_of[*m] = k;
      }
      orbit_of[k] = k;
      auto home = component_of(atlas.quotient(i).canonical_rep_unchecked(reps[k]));
      kept.push_back(home && orbit_of[*home] == k ? *home : k);
    }
    for (std::size_t n = 0; n < kept.size(); ++n) {
      const std::size_t k = kept[n];
      std::vector<std::size_t> keep;
      for (std::size_t g = 0; g < c.group.order(); ++g) {
        if (parts[k].contains(c.group.real_element(g) * reps[k])) keep.push_back(g);
      }
      Chart r{c.id + "|" + tag + (kept.size() > 1 ? "#" + std::to_string(n) : ""),
              parts[k],
              c.group.subgroup(keep),
              c.name,
              c.id,
              c.ambient ? c.ambient : std::optional<FiniteMatrixGroup>(c.group)};
      children[i].push_back(r.id);
      out.add_chart(std::move(r));
    }
  }
  if (out.charts().empty()) throw Error(ErrorCode::empty_restriction, "selection misses every chart of " + atlas.name());
  for (const auto& rel : atlas.relations()) {
    for (const auto& a : children[rel.from]) {
      for (const auto& b : children[rel.to]) out.add_identification({a, b, rel.map, rel.domain});
    }
  }
  return out;
}

LinkSet restriction_links(const Atlas& original, const Atlas& restricted) {
  LinkSet out;
  for (const auto& c : restricted.charts()) {
    if (c.parent.empty() || !original.has_chart(c.parent)) continue;
    out.forward.push_back({c.parent, c.id, MapExpr::identity(original.dim()), std::nullopt});
    out.backward.push_back({c.id, c.parent, MapExpr::identity(original.dim()), std::nullopt});
  }
  return out;
}

Atlas reglue(const Atlas& original, const std::vector<Atlas>& pieces) {
  Atlas out(original.name() + "|reglued", original.dim(), original.mode());
  std::vector<std::pair<std::string, std::string>> made;  // (id, parent)
  for (const auto& piece : pieces) {
    for (const auto& c : piece.charts()) {
      out.add_chart(c);
      made.emplace_back(c.id, c.parent);
    }
  }
  for (const auto& rel : original.relations()) {
    const std::string& from = original.charts()[rel.from].id;
    const std::string& to = original.charts()[rel.to].id;
    for (const auto& [a, pa] : made) {
      if (pa != from) continue;
      for (const auto& [b, pb] : made) {
        if (pb == to) out.add_identification({a, b, rel.map, rel.domain});
      }
    }
  }
  for (const auto& [a, pa] : made) {
    for (const auto& [b, pb] : made) {
      if (a != b && pa == pb) out.add_identification({a, b, MapExpr::identity(original.dim()), std::nullopt});
    }
  }
  return out;
}

}  // namespace orbi
