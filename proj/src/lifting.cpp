#include "orbi/lifting.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "orbi/error.hpp"
#include "orbi/kernels.hpp"
#include "orbi/random.hpp"

namespace orbi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string point_string(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ")";
  return os.str();
}

double scaled(double tol, const Eigen::VectorXd& y) { return tol * std::max(1.0, y.norm()); }

bool has_trivial_stabilizer(const FiniteMatrixGroup& g, const Eigen::VectorXd& y, double tol) {
  return stabilizer_indices(g, y, tol).size() == 1;
}

std::optional<std::size_t> match_element(const FiniteMatrixGroup& g, const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                                         double tol) {
  const double bound = tol * std::max({1.0, from.norm(), to.norm()});
  std::optional<std::size_t> best;
  double best_d = kInf;
  for (std::size_t i = 0; i < g.order(); ++i) {
    double d = (g.real_element(i) * from - to).norm();
    if (d <= bound && d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

// Adaptive continuation along one path.
class Stepper {
 public:
  Stepper(const QuotientMap& f, const LiftOptions& options, Eigen::VectorXd seed)
      : f_(f), options_(options), target_(f.target()), y_(std::move(seed)) {
    for (const auto& p : orbit(target_.group(), y_, options_.tolerance)) {
      double d = target_.norm(p - y_);
      if (d > scaled(options_.tolerance, y_)) start_sep_ = std::min(start_sep_, d);
    }
  }

  void step(const Eigen::VectorXd& xa, const Eigen::VectorXd& xb, std::size_t depth) {
    const double h = (xb - xa).norm();
    if (h == 0) return;
    std::vector<Eigen::VectorXd> cands = orbit(target_.group(), f_.raw(xb), options_.tolerance);
    std::vector<std::pair<double, std::size_t>> dist;
    const bool distinct = cands.size() > 1;
    const bool full = cands.size() == target_.group().order();
    double d1 = 0, d2 = kInf;
    bool decisive = false;
    Eigen::VectorXd pred;
    for (;;) {
      pred = have_velocity_ ? Eigen::VectorXd(y_ + velocity_ * h) : y_;
      dist.clear();
      for (std::size_t k = 0; k < cands.size(); ++k) dist.emplace_back(target_.norm(cands[k] - pred), k);
      std::sort(dist.begin(), dist.end());
      d1 = dist[0].first;
      d2 = distinct ? dist[1].first : kInf;
      // Without a velocity the prediction is the current point, which near a
      // mirror can sit closer to the reflected branch; keep the first step
      // short against the spacing of the starting orbit.
      decisive = !distinct || (d2 > 4 * d1 && (have_velocity_ || 16 * d1 <= start_sep_));
      // A velocity taken over a long step carries an error proportional to
      // that step, which halving the current step does not remove.
      if (decisive || !have_velocity_ || velocity_h_ <= 2 * h || !refine_velocity(xa)) break;
    }
    if (decisive) {
      clean_ = clean_ && full;
      advance(cands[dist[0].second], h, xa);
      return;
    }
    if (depth < options_.max_subdivision) {
      Eigen::VectorXd mid = 0.5 * (xa + xb);
      step(xa, mid, depth + 1);
      step(mid, xb, depth + 1);
      return;
    }
    clean_ = false;
    std::vector<Eigen::VectorXd> prev_orbit = orbit(target_.group(), y_, options_.tolerance);
    if (prev_orbit.size() == target_.group().order()) {
      double sep = kInf;
      for (const auto& p : prev_orbit) {
        double d = target_.norm(p - y_);
        if (d > 0) sep = std::min(sep, d);
      }
      if (sep > 1e-6 * std::max(1.0, y_.norm())) {
        throw Error(ErrorCode::step_too_large,
                    "no clear continuation from " + point_string(xa) + " to " + point_string(xb));
      }
    }
    // Leaving a (near) fixed point: every nearby orbit point is a valid
    // continuation, so take the canonical one among the tied candidates.
    Eigen::VectorXd choice = cands[dist[0].second];
    for (const auto& [d, k] : dist) {
      if (d > 4 * d1 + scaled(options_.tolerance, pred)) break;
      const Eigen::VectorXd& c = cands[k];
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (c[i] > choice[i]) {
          choice = c;
          break;
        }
        if (c[i] < choice[i]) break;
      }
    }
    advance(choice, h, xa);
  }

  const Eigen::VectorXd& current() const { return y_; }
  bool clean() const { return clean_; }
  void mark_unclean() { clean_ = false; }

 private:
  void advance(const Eigen::VectorXd& next, double h, const Eigen::VectorXd& xa) {
    velocity_ = (next - y_) / h;
    velocity_h_ = h;
    have_velocity_ = true;
    back_x_ = xa;
    back_y_ = y_;
    y_ = next;
  }

  // Re-derives the velocity at `xa` from the second half of the last step,
  // placing the midpoint against the chord.
  bool refine_velocity(const Eigen::VectorXd& xa) {
    Eigen::VectorXd xm = 0.5 * (back_x_ + xa);
    Eigen::VectorXd chord = 0.5 * (back_y_ + y_);
    std::vector<Eigen::VectorXd> cands = orbit(target_.group(), f_.raw(xm), options_.tolerance);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t k = 0; k < cands.size(); ++k) dist.emplace_back(target_.norm(cands[k] - chord), k);
    std::sort(dist.begin(), dist.end());
    if (dist.size() > 1 && dist[1].first <= 4 * dist[0].first) return false;
    const double hm = (xa - xm).norm();
    if (hm == 0) return false;
    back_x_ = xm;
    back_y_ = cands[dist[0].second];
    velocity_ = (y_ - back_y_) / hm;
    velocity_h_ = hm;
    return true;
  }

  const QuotientMap& f_;
  const LiftOptions& options_;
  const LinearQuotient& target_;
  Eigen::VectorXd y_;
  Eigen::VectorXd velocity_;
  double velocity_h_ = 0;
  Eigen::VectorXd back_x_;
  Eigen::VectorXd back_y_;
  bool have_velocity_ = false;
  bool clean_ = true;
  double start_sep_ = kInf;
};

}  // namespace

QuotientMap::QuotientMap(LinearQuotient source, Region source_region, LinearQuotient target, Evaluator eval,
                         std::optional<MapExpr> declared_lift)
    : source_(std::move(source)),
      region_(std::move(source_region)),
      target_(std::move(target)),
      eval_(std::move(eval)),
      declared_(std::move(declared_lift)) {
  if (region_.dim() != source_.dim()) throw Error(ErrorCode::dim_mismatch, "source region dimension");
}

QuotientMap QuotientMap::from_lift(LinearQuotient source, LinearQuotient target, MapExpr lift) {
  if (lift.in_dim() != source.dim() || lift.out_dim() != target.dim()) throw Error(ErrorCode::dim_mismatch, "lift dimensions");
  Region region = lift.domain();
  Evaluator eval = [lift](const Eigen::VectorXd& x) { return lift(x); };
  return QuotientMap(std::move(source), std::move(region), std::move(target), std::move(eval), std::move(lift));
}

Eigen::VectorXd QuotientMap::raw(const Eigen::VectorXd& x) const {
  if (!region_.contains(x)) throw Error(ErrorCode::evaluation_error, "point " + point_string(x) + " outside the source region");
  Eigen::VectorXd y = eval_(x);
  if (static_cast<std::size_t>(y.size()) != target_.dim()) throw Error(ErrorCode::dim_mismatch, "evaluator output dimension");
  return y;
}

Eigen::VectorXd QuotientMap::operator()(const Eigen::VectorXd& x) const { return target_.canonical_rep_unchecked(raw(x)); }

PathLift path_lift_detailed(const QuotientMap& f, const std::vector<Eigen::VectorXd>& path, const Eigen::VectorXd& seed,
                            const LiftOptions& options) {
  if (path.empty()) throw Error(ErrorCode::invalid_argument, "empty path");
  if (static_cast<std::size_t>(seed.size()) != f.target().dim()) throw Error(ErrorCode::dim_mismatch, "seed dimension");
  Eigen::VectorXd start = f.raw(path.front());
  if (!match_element(f.target().group(), start, seed, options.tolerance)) {
    throw Error(ErrorCode::seed_off_orbit, "seed " + point_string(seed) + " is not on the image orbit " + point_string(start));
  }
  Stepper stepper(f, options, seed);
  if (!has_trivial_stabilizer(f.target().group(), seed, options.tolerance)) stepper.mark_unclean();
  PathLift out;
  out.points.push_back(seed);
  for (std::size_t k = 1; k < path.size(); ++k) {
    stepper.step(path[k - 1], path[k], 0);
    out.points.push_back(stepper.current());
  }
  out.clean = stepper.clean();
  return out;
}

std::vector<Eigen::VectorXd> path_lift(const QuotientMap& f, const std::vector<Eigen::VectorXd>& path,
                                       const Eigen::VectorXd& seed, const LiftOptions& options) {
  return path_lift_detailed(f, path, seed, options).points;
}

std::vector<Eigen::VectorXd> segment(const Eigen::VectorXd& a, const Eigen::VectorXd& b, std::size_t steps) {
  steps = std::max<std::size_t>(steps, 1);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k <= steps; ++k) {
    double t = static_cast<double>(k) / static_cast<double>(steps);
    out.push_back((1 - t) * a + t * b);
  }
  return out;
}

std::vector<Eigen::VectorXd> circle_loop(const Eigen::VectorXd& c, double radius, std::size_t steps) {
  if (c.size() < 2) throw Error(ErrorCode::dim_mismatch, "circle loops need dimension >= 2");
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k <= steps; ++k) {
    double t = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(steps);
    Eigen::VectorXd p = c;
    p[0] += radius * std::cos(t);
    p[1] += radius * std::sin(t);
    out.push_back(p);
  }
  return out;
}

std::size_t monodromy(const QuotientMap& f, const std::vector<Eigen::VectorXd>& loop, const Eigen::VectorXd& seed,
                      const LiftOptions& options) {
  std::vector<Eigen::VectorXd> closed = loop;
  if (closed.empty()) throw Error(ErrorCode::invalid_argument, "empty loop");
  if ((closed.back() - closed.front()).norm() > 0) closed.push_back(closed.front());
  std::vector<Eigen::VectorXd> lifted = path_lift(f, closed, seed, options);
  auto g = match_element(f.target().group(), lifted.front(), lifted.back(), options.tolerance);
  if (!g) {
    throw Error(ErrorCode::no_group_element,
                "loop lift ends at " + point_string(lifted.back()) + ", off the orbit of " + point_string(lifted.front()));
  }
  // Prefer the identity when the start is fixed by several elements.
  if ((f.target().group().real_element(0) * lifted.front() - lifted.back()).norm() <=
      scaled(options.tolerance, lifted.front())) {
    return 0;
  }
  return *g;
}

std::size_t unique_group_element(const MapExpr& h, const Region& u, const FiniteMatrixGroup& g, const LiftOptions& options) {
  if (h.in_dim() != g.dim() || h.out_dim() != g.dim() || u.dim() != g.dim()) {
    throw Error(ErrorCode::dim_mismatch, "map, region and group dimensions differ");
  }
  std::vector<Eigen::VectorXd> xs = sample_region(u, options.samples, options.seed);
  std::vector<Eigen::VectorXd> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) ys.push_back(h(x));
  std::vector<long> matches = kernels::parallel::match_elements(g, xs, ys, options.tolerance);
  std::optional<std::size_t> answer;
  std::size_t witness = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (matches[i] == kernels::kNoMatch) {
      throw Error(ErrorCode::not_orbit_preserving,
                  "h" + point_string(xs[i]) + " = " + point_string(ys[i]) + " is off the orbit of the sample");
    }
    if (matches[i] == kernels::kManyMatches) continue;
    if (!has_trivial_stabilizer(g, xs[i], options.tolerance)) continue;
    auto idx = static_cast<std::size_t>(matches[i]);
    if (!answer) {
      answer = idx;
      witness = i;
    } else if (*answer != idx) {
      throw Error(ErrorCode::inconsistent, "samples " + point_string(xs[witness]) + " and " + point_string(xs[i]) +
                                               " need different group elements");
    }
  }
  if (!answer) throw Error(ErrorCode::ambiguous, "no sample with trivial stabilizer");
  return *answer;
}

std::optional<GroupHomomorphism> extend_from_generators(const FiniteMatrixGroup& source, const FiniteMatrixGroup& target,
                                                        const std::vector<std::size_t>& generator_images) {
  const auto& gens = source.generators();
  if (gens.size() != generator_images.size()) throw Error(ErrorCode::dim_mismatch, "generator image count");
  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> image(source.order(), unset);
  image[0] = 0;
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    std::size_t a = queue.front();
    queue.pop_front();
    for (std::size_t k = 0; k < gens.size(); ++k) {
      std::size_t b = source.multiply(a, gens[k]);
      std::size_t ib = target.multiply(image[a], generator_images[k]);
      if (image[b] == unset) {
        image[b] = ib;
        queue.push_back(b);
      } else if (image[b] != ib) {
        return std::nullopt;
      }
    }
  }
  GroupHomomorphism h{image};
  if (std::find(image.begin(), image.end(), unset) != image.end() || !is_homomorphism(source, target, h)) return std::nullopt;
  return h;
}

GroupHomomorphism induced_homomorphism(const MapExpr& f, const FiniteMatrixGroup& g, const FiniteMatrixGroup& target,
                                       const Region& u, const InducedOptions& options) {
  if (f.in_dim() != g.dim() || f.out_dim() != target.dim() || u.dim() != g.dim()) {
    throw Error(ErrorCode::dim_mismatch, "map, region and group dimensions differ");
  }
  const double tol = options.lift.tolerance;
  std::vector<Eigen::VectorXd> xs = sample_region(u, options.lift.samples, options.lift.seed);
  std::vector<Eigen::VectorXd> ys;
  for (const auto& x : xs) ys.push_back(f(x));

  if (options.require_injective) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = i + 1; j < xs.size(); ++j) {
        if (match_element(target, ys[i], ys[j], tol) && !match_element(g, xs[i], xs[j], tol)) {
          throw Error(ErrorCode::invalid_argument, "map is not injective on orbits: " + point_string(xs[i]) + " and " +
                                                       point_string(xs[j]) + " have the same image orbit");
        }
      }
    }
  }

  std::vector<std::size_t> images;
  for (std::size_t gen : g.generators()) {
    std::vector<char> allowed(target.order(), 1);
    std::size_t used = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Eigen::VectorXd gx = g.real_element(gen) * xs[i];
      if (!u.contains(gx)) continue;
      Eigen::VectorXd fgx = f(gx);
      const double bound = tol * std::max({1.0, ys[i].norm(), fgx.norm()});
      ++used;
      for (std::size_t t = 0; t < target.order(); ++t) {
        if ((target.real_element(t) * ys[i] - fgx).norm() > bound) allowed[t] = 0;
      }
    }
    std::vector<std::size_t> survivors;
    for (std::size_t t = 0; t < target.order(); ++t) {
      if (allowed[t]) survivors.push_back(t);
    }
    if (used == 0 || survivors.empty()) {
      throw Error(ErrorCode::no_consistent_image, "generator " + g.element(gen).to_string() + " has no unanimous image");
    }
    if (survivors.size() > 1) {
      throw Error(ErrorCode::no_consistent_image,
                  "generator " + g.element(gen).to_string() + " has several images on every sample");
    }
    images.push_back(survivors.front());
  }
  auto h = extend_from_generators(g, target, images);
  if (!h) throw Error(ErrorCode::not_homomorphism, "generator images violate the group relations");

  // Differentiating f(g x) = h(g) f(x) at the origin gives L g = h(g) L.
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.dim()));
  if (g.dim() == target.dim() && u.contains(zero) && f.domain().contains(zero)) {
    Eigen::MatrixXd l = jacobian_fd(f, zero);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(l);
    const auto& s = svd.singularValues();
    if (s.minCoeff() > 1e-6 * std::max(s.maxCoeff(), 1e-300)) {
      Eigen::MatrixXd linv = l.inverse();
      for (std::size_t i = 0; i < g.order(); ++i) {
        Eigen::MatrixXd c = l * g.real_element(i) * linv;
        if ((c - target.real_element(h->image[i])).norm() > 1e-4 * std::max(1.0, c.norm())) {
          throw Error(ErrorCode::not_homomorphism,
                      "orbit matching disagrees with the Jacobian conjugation at " + g.element(i).to_string());
        }
      }
    }
  }
  return *h;
}

StabilizerTransport stabilizer_transport(const MapExpr& f, const LinearQuotient& source, const LinearQuotient& target,
                                         const Eigen::VectorXd& u) {
  if (f.in_dim() != source.dim() || f.out_dim() != target.dim()) throw Error(ErrorCode::dim_mismatch, "map dimensions");
  StabilizerTransport out;
  out.jacobian = jacobian_fd(f, u);
  if (out.jacobian.rows() != out.jacobian.cols()) throw Error(ErrorCode::singular_jacobian, "Jacobian is not square");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.jacobian);
  const auto& s = svd.singularValues();
  if (!(s.minCoeff() > 1e-8 * s.maxCoeff())) {
    throw Error(ErrorCode::singular_jacobian, "Jacobian at " + point_string(u) + " is singular");
  }
  Eigen::VectorXd v = f(u);
  std::vector<std::size_t> stab = stabilizer_indices(source.group(), u, 1e-7);
  std::vector<std::size_t> stab_target = stabilizer_indices(target.group(), v, 1e-7);
  if (stab.size() != stab_target.size()) return out;
  Eigen::MatrixXd linv = out.jacobian.inverse();
  std::vector<char> hit(target.group().order(), 0);
  for (std::size_t i : stab) {
    Eigen::MatrixXd c = out.jacobian * source.group().real_element(i) * linv;
    auto t = target.group().find_real(c, 1e-4);
    if (!t || std::find(stab_target.begin(), stab_target.end(), *t) == stab_target.end() || hit[*t]) return out;
    hit[*t] = 1;
  }
  out.ok = true;
  return out;
}

LiftTable::LiftTable(std::shared_ptr<const QuotientMap> f, LiftOptions options) : f_(std::move(f)), options_(options) {}

void LiftTable::set_core(MapExpr core, double radius) {
  core_ = std::move(core);
  core_radius_ = radius;
}

std::size_t LiftTable::add(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

std::size_t LiftTable::nearest(const Eigen::VectorXd& x) const {
  if (nodes_.empty()) throw Error(ErrorCode::invalid_argument, "empty lift table");
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    double d = (nodes_[i].x - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Eigen::VectorXd LiftTable::operator()(const Eigen::VectorXd& x) const {
  if (core_ && f_->source().norm(x) < core_radius_) return core_->eval_unrestricted(x);
  const Node& n = nodes_[nearest(x)];
  return path_lift(*f_, segment(n.x, x, 4), n.y, options_).back();
}

std::string to_string(LiftStatus s) {
  switch (s) {
    case LiftStatus::lifted: return "Lifted";
    case LiftStatus::non_liftable: return "NonLiftable";
    case LiftStatus::inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

namespace {

struct RadialExtent {
  double inner;
  double outer;
  bool contains_origin;
};

// Radii (in the invariant norm of `gram`) of the invariant shells that fit
// inside the source region.
RadialExtent radial_extent(const Region& region, const Eigen::MatrixXd& gram) {
  const auto n = gram.rows();
  auto bounds = [&](const Eigen::MatrixXd& other) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(other, gram);
    return std::pair{es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  };
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  switch (region.kind()) {
    case Region::Kind::full_space: {
      auto [lo, hi] = bounds(id);
      return {0, kDefaultWindow / std::sqrt(hi), true};
    }
    case Region::Kind::ball: {
      if (region.center().norm() > 1e-12) break;
      auto [lo, hi] = bounds(region.uses_gram() ? region.gram() : id);
      return {0, region.radius() / std::sqrt(hi), true};
    }
    case Region::Kind::annulus: {
      auto [lo, hi] = bounds(id);
      double outer = std::isfinite(region.outer()) ? region.outer() / std::sqrt(hi) : kDefaultWindow / std::sqrt(hi);
      return {region.inner() / std::sqrt(lo), outer, region.inner() == 0};
    }
    default: break;
  }
  throw Error(ErrorCode::invalid_argument, "radial extension needs a ball, annulus or full space centered at the origin");
}

// Directions spread over the unit sphere: the boundary of a cube grid,
// turned by a fixed generic rotation so no direction sits on a symmetry
// axis of the usual groups.
std::vector<Eigen::VectorXd> sphere_directions(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (dim == 1) return {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
  const std::size_t k = dim == 2 ? 10 : 6;
  Rng rng(977);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rng.uniform(-1, 1);
  }
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
  std::vector<Eigen::VectorXd> out;
  std::vector<std::size_t> idx(dim, 0);
  for (;;) {
    bool boundary = false;
    Eigen::VectorXd p(n);
    for (std::size_t i = 0; i < dim; ++i) {
      if (idx[i] == 0 || idx[i] == k) boundary = true;
      p[static_cast<Eigen::Index>(i)] = -1.0 + 2.0 * static_cast<double>(idx[i]) / static_cast<double>(k);
    }
    if (boundary) out.push_back(q * p.normalized());
    std::size_t i = 0;
    while (i < dim && ++idx[i] > k) idx[i++] = 0;
    if (i == dim) break;
  }
  return out;
}

// A path from x to gx on the invariant sphere through x.
std::vector<Eigen::VectorXd> sphere_path(const LinearQuotient& q, const Eigen::VectorXd& x, const Eigen::VectorXd& gx,
                                         std::size_t steps) {
  // When g is a reflection the path is symmetric about its mirror; an odd
  // count keeps the mirror off the vertices, where the path has corners.
  if (steps % 2 == 0) ++steps;
  const double rad = q.norm(x);
  const Eigen::MatrixXd& gram = q.gram().real;
  auto project = [&](const Eigen::VectorXd& p) { return Eigen::VectorXd(rad * p / q.norm(p)); };
  auto leg = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, std::vector<Eigen::VectorXd>& out) {
    for (std::size_t k = out.empty() ? 0 : 1; k <= steps; ++k) {
      double t = static_cast<double>(k) / static_cast<double>(steps);
      out.push_back(project((1 - t) * a + t * b));
    }
  };
  double closest = kInf;
  for (std::size_t k = 0; k <= steps; ++k) {
    double t = static_cast<double>(k) / static_cast<double>(steps);
    closest = std::min(closest, q.norm((1 - t) * x + t * gx));
  }
  std::vector<Eigen::VectorXd> out;
  if (closest > 0.3 * rad) {
    leg(x, gx, out);
    return out;
  }
  Eigen::VectorXd best;
  double best_n = -1;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(x.size(), i);
    Eigen::VectorXd r = e - (e.dot(gram * x) / x.dot(gram * x)) * x;
    double rn = q.norm(r);
    if (rn > best_n) {
      best_n = rn;
      best = r;
    }
  }
  Eigen::VectorXd w = project(best);
  leg(x, w, out);
  leg(w, gx, out);
  return out;
}

std::string describe_matrix(const FiniteMatrixGroup& g, std::size_t i) { return g.element(i).to_string(); }

}  // namespace

VoltageSolution solve_voltages(const FiniteMatrixGroup& g, std::size_t nodes, std::size_t fixed,
                               const std::vector<VoltageEdge>& edges) {
  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
  VoltageSolution out;
  std::vector<std::size_t>& c = out.correction;
  c.assign(nodes, unset);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nodes);
  for (const auto& e : edges) {
    adj[e.a].emplace_back(e.b, e.g);
    adj[e.b].emplace_back(e.a, g.inverse(e.g));
  }
  std::deque<std::size_t> queue;
  auto drain = [&] {
    while (!queue.empty()) {
      std::size_t a = queue.front();
      queue.pop_front();
      for (auto [b, h] : adj[a]) {
        if (c[b] == unset) {
          c[b] = g.multiply(c[a], h);
          queue.push_back(b);
        }
      }
    }
  };
  for (std::size_t i = 0; i < fixed && i < nodes; ++i) {
    c[i] = 0;
    queue.push_back(i);
  }
  drain();
  for (std::size_t i = 0; i < nodes; ++i) {
    if (c[i] == unset) {
      c[i] = 0;
      queue.push_back(i);
      drain();
    }
  }
  for (const auto& e : edges) {
    std::size_t expect = g.multiply(c[e.a], e.g);
    if (expect != c[e.b]) {
      out.violation = e;
      out.holonomy = g.multiply(g.inverse(c[e.b]), expect);
      break;
    }
  }
  return out;
}

LiftReport radial_lift_extension(const QuotientMap& f, double rho, std::optional<MapExpr> initial, const LiftOptions& options) {
  const LinearQuotient& src = f.source();
  const FiniteMatrixGroup& tgt = f.target().group();
  const std::size_t dim = src.dim();
  RadialExtent ext = radial_extent(f.source_region(), src.gram().real);
  const double outer = ext.outer * (1 - 1e-3);
  if (!(rho > 0)) throw Error(ErrorCode::invalid_argument, "initial radius must be positive");
  if (!initial && f.declared_lift() && ext.contains_origin) initial = f.declared_lift();
  if (initial && !ext.contains_origin) initial.reset();

  auto fshared = std::make_shared<QuotientMap>(f);
  auto table = std::make_shared<LiftTable>(fshared, options);
  LiftReport report;

  double r = ext.contains_origin ? std::min(rho, outer) : ext.inner + 0.05 * (outer - ext.inner);
  if (initial) {
    std::vector<Eigen::VectorXd> probes =
        sample_region(Region::intersection({f.source_region(), Region::gamma_ball(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), r,
                                                                                   src.gram().real)}),
                      16, options.seed);
    for (const auto& x : probes) {
      if (!match_element(tgt, f.raw(x), initial->eval_unrestricted(x), options.tolerance)) {
        throw Error(ErrorCode::invalid_argument, "initial map does not lift f at " + point_string(x));
      }
    }
    table->set_core(*initial, r);
  }

  const std::vector<Eigen::VectorXd> directions = sphere_directions(dim);
  const double neighbor_radius = dim == 1 ? kInf : 0.45;

  for (;;) {
    ++report.rounds;
    const std::size_t old_count = table->nodes().size();
    std::vector<Eigen::VectorXd> ring;
    for (const auto& d : directions) {
      Eigen::VectorXd p = r * d / src.norm(d);
      if (f.source_region().contains(p)) ring.push_back(p);
    }
    // Local lifts on the new sphere, each continued from the existing lift.
    std::vector<std::optional<Eigen::VectorXd>> seeds(ring.size());
    std::vector<std::optional<std::size_t>> parent(ring.size());
    detail::parallel_for(ring.size(), [&](std::size_t i) {
      const Eigen::VectorXd& p = ring[i];
      try {
        if (initial && report.rounds == 1) {
          seeds[i] = initial->eval_unrestricted(p);
        } else if (old_count > 0) {
          std::size_t o = table->nearest(p);
          PathLift pl = path_lift_detailed(f, segment(table->node(o).x, p, 4), table->node(o).y, options);
          seeds[i] = pl.points.back();
          if (pl.clean) parent[i] = o;
        } else {
          seeds[i] = f(p);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::evaluation_error) throw;
      }
    });
    std::vector<std::size_t> index(ring.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < ring.size(); ++i) {
      if (seeds[i]) index[i] = table->add({ring[i], *seeds[i]});
    }
    const std::size_t total = table->nodes().size();
    if (total > options.max_nodes) {
      report.status = LiftStatus::inconclusive;
      report.note = "node budget exhausted at radius " + std::to_string(r);
      return report;
    }

    // Overlap comparisons between neighboring local lifts.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = old_count; i < total; ++i) {
      for (std::size_t j = 0; j < total; ++j) {
        if (j == i || (j >= old_count && j < i)) continue;
        if (src.norm(table->node(i).x - table->node(j).x) <= neighbor_radius * r) pairs.emplace_back(i, j);
      }
    }
    std::vector<std::optional<VoltageEdge>> edges(pairs.size());
    detail::parallel_for(pairs.size(), [&](std::size_t k) {
      auto [a, b] = pairs[k];
      try {
        PathLift pl = path_lift_detailed(f, segment(table->node(a).x, table->node(b).x, 4), table->node(a).y, options);
        if (!pl.clean) return;
        auto g = match_element(tgt, table->node(b).y, pl.points.back(), options.tolerance);
        if (g) edges[k] = VoltageEdge{a, b, *g};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::evaluation_error) throw;
      }
    });
    std::vector<VoltageEdge> forced;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      if (parent[i] && seeds[i]) forced.push_back({*parent[i], index[i], 0});
    }
    for (const auto& e : edges) {
      if (e) forced.push_back(*e);
    }

    VoltageSolution sol = solve_voltages(tgt, total, old_count, forced);
    if (sol.violation) {
      const VoltageEdge& e = *sol.violation;
      report.status = LiftStatus::non_liftable;
      report.monodromy = sol.holonomy;
      report.obstruction = "monodromy " + describe_matrix(tgt, sol.holonomy) + " between " +
                           point_string(table->node(e.a).x) + " and " + point_string(table->node(e.b).x);
      return report;
    }
    const auto& c = sol.correction;
    for (std::size_t i = old_count; i < total; ++i) table->node(i).y = tgt.real_element(c[i]) * table->node(i).y;

    if (r >= outer) break;
    r = std::min(1.2 * r, outer);
  }

  // Equivariance of the lift, probed one sample at a time.
  std::vector<Eigen::VectorXd> xs = sample_region(f.source_region(), options.samples, options.seed);
  const auto& gens = src.group().generators();
  std::vector<std::optional<LocalHomomorphism>> locals(xs.size());
  detail::parallel_for(xs.size(), [&](std::size_t i) {
    const Eigen::VectorXd& x = xs[i];
    try {
      // Samples near a source mirror give probe paths too short to follow.
      for (std::size_t g = 1; g < src.group().order(); ++g) {
        if (src.norm(src.group().real_element(g) * x - x) < 0.05 * src.norm(x)) return;
      }
      Eigen::VectorXd y = (*table)(x);
      if (!has_trivial_stabilizer(tgt, y, options.tolerance)) return;
      LocalHomomorphism lh{x, {}};
      for (std::size_t gen : gens) {
        Eigen::VectorXd gx = src.group().real_element(gen) * x;
        std::optional<std::size_t> g;
        if (dim >= 2) {
          PathLift pl = path_lift_detailed(f, sphere_path(src, x, gx, 24), y, options);
          g = match_element(tgt, y, pl.points.back(), options.tolerance);
        } else {
          g = match_element(tgt, y, (*table)(gx), options.tolerance);
        }
        if (!g) return;
        lh.generator_images.push_back(*g);
      }
      locals[i] = std::move(lh);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::evaluation_error && e.code() != ErrorCode::step_too_large) throw;
    }
  });
  for (auto& l : locals) {
    if (l) report.local_homomorphisms.push_back(std::move(*l));
  }
  if (report.local_homomorphisms.empty()) {
    report.status = LiftStatus::inconclusive;
    report.note = "no sample determined the equivariance of the lift";
    return report;
  }

  std::map<std::vector<std::size_t>, std::size_t> classes;
  for (std::size_t i = 0; i < report.local_homomorphisms.size(); ++i) {
    classes.emplace(report.local_homomorphisms[i].generator_images, i);
  }
  if (classes.size() == 1) {
    auto h = extend_from_generators(src.group(), tgt, classes.begin()->first);
    if (!h) {
      report.status = LiftStatus::inconclusive;
      report.note = "sampled equivariance violates the group relations";
      return report;
    }
    report.status = LiftStatus::lifted;
    report.homomorphism = *h;
    report.lift = table;
    return report;
  }
  auto conjugate = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t g = 0; g < tgt.order(); ++g) {
      bool all = true;
      for (std::size_t k = 0; k < a.size() && all; ++k) {
        all = tgt.multiply(tgt.multiply(g, a[k]), tgt.inverse(g)) == b[k];
      }
      if (all) return true;
    }
    return false;
  };
  const auto& first = *classes.begin();
  for (const auto& other : classes) {
    if (conjugate(first.first, other.first)) continue;
    const auto& la = report.local_homomorphisms[first.second];
    const auto& lb = report.local_homomorphisms[other.second];
    auto show = [&](const std::vector<std::size_t>& imgs) {
      std::string s = "[";
      for (std::size_t k = 0; k < imgs.size(); ++k) s += (k ? "," : "") + describe_matrix(tgt, imgs[k]);
      return s + "]";
    };
    report.status = LiftStatus::non_liftable;
    report.obstruction = "conflicting local homomorphisms: near " + point_string(la.sample) + " generators map to " +
                         show(first.first) + ", near " + point_string(lb.sample) + " to " + show(other.first);
    return report;
  }
  report.status = LiftStatus::inconclusive;
  report.note = "local homomorphisms agree only up to conjugation";
  return report;
}

}  // namespace orbi
