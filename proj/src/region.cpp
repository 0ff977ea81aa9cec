#include "orbi/region.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "orbi/error.hpp"
#include "orbi/kernels.hpp"

namespace orbi {

struct Region::Node {
  Kind kind = Kind::full_space;
  std::size_t dim = 0;
  Eigen::VectorXd center;
  double radius = 0;
  double inner = 0;
  double outer = 0;
  double from = 0;
  double to = 0;
  bool gamma = false;
  Eigen::MatrixXd gram;
  std::vector<Region> parts;
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;
  Eigen::MatrixXd linear_inverse;
  std::shared_ptr<const GridLabels> labels;
  int label = -1;
  std::function<bool(const Eigen::VectorXd&)> test;
  std::string text;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_angle(double a) {
  const double two_pi = 2 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  return a < 0 ? a + two_pi : a;
}

}  // namespace

Region Region::full_space(std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::invalid_argument, "region dimension must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::full_space;
  n->dim = dim;
  return Region(n);
}

Region Region::ball(Eigen::VectorXd center, double radius) {
  if (!(radius > 0)) throw Error(ErrorCode::invalid_argument, "ball radius must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Kind::ball;
  n->dim = static_cast<std::size_t>(center.size());
  n->center = std::move(center);
  n->radius = radius;
  return Region(n);
}

Region Region::gamma_ball(Eigen::VectorXd center, double radius, Eigen::MatrixXd gram) {
  if (gram.rows() != center.size() || gram.cols() != center.size()) {
    throw Error(ErrorCode::dim_mismatch, "gram matrix does not match ball center");
  }
  Region r = ball(std::move(center), radius);
  auto n = std::make_shared<Node>(*r.node_);
  n->gamma = true;
  n->gram = std::move(gram);
  return Region(n);
}

Region Region::annulus(std::size_t dim, double inner, double outer) {
  if (dim == 0) throw Error(ErrorCode::invalid_argument, "region dimension must be >= 1");
  if (!(inner >= 0) || !(inner < outer)) throw Error(ErrorCode::invalid_argument, "annulus needs 0 <= inner < outer");
  auto n = std::make_shared<Node>();
  n->kind = Kind::annulus;
  n->dim = dim;
  n->inner = inner;
  n->outer = outer;
  return Region(n);
}

Region Region::sector(double inner, double outer, double from_angle, double to_angle) {
  if (!(inner >= 0) || !(inner < outer)) throw Error(ErrorCode::invalid_argument, "sector needs 0 <= inner < outer");
  if (!(to_angle > from_angle) || to_angle - from_angle > 2 * std::numbers::pi) {
    throw Error(ErrorCode::invalid_argument, "sector needs from < to <= from + 2pi");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::sector;
  n->dim = 2;
  n->inner = inner;
  n->outer = outer;
  n->from = from_angle;
  n->to = to_angle;
  return Region(n);
}

Region Region::finite_union(std::vector<Region> parts) {
  if (parts.empty()) throw Error(ErrorCode::invalid_argument, "union needs at least one part");
  auto n = std::make_shared<Node>();
  n->kind = Kind::finite_union;
  n->dim = parts.front().dim();
  for (const auto& p : parts) {
    if (p.dim() != n->dim) throw Error(ErrorCode::dim_mismatch, "union parts differ in dimension");
  }
  n->parts = std::move(parts);
  return Region(n);
}

Region Region::intersection(std::vector<Region> parts) {
  if (parts.empty()) throw Error(ErrorCode::invalid_argument, "intersection needs at least one part");
  Region r = finite_union(std::move(parts));
  auto n = std::make_shared<Node>(*r.node_);
  n->kind = Kind::intersection;
  return Region(n);
}

Region Region::affine_image(Region base, Eigen::MatrixXd a, Eigen::VectorXd b) {
  const auto d = static_cast<Eigen::Index>(base.dim());
  if (a.rows() != d || a.cols() != d || b.size() != d) throw Error(ErrorCode::dim_mismatch, "affine image");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorCode::singular, "affine image needs an invertible linear part");
  auto n = std::make_shared<Node>();
  n->kind = Kind::affine_image;
  n->dim = base.dim();
  n->linear_inverse = lu.inverse();
  n->linear = std::move(a);
  n->offset = std::move(b);
  n->parts = {std::move(base)};
  return Region(n);
}

Region Region::component(Region base, std::shared_ptr<const GridLabels> labels, int label) {
  if (!labels || label < 0 || label >= labels->component_count) {
    throw Error(ErrorCode::invalid_argument, "component label out of range");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::component;
  n->dim = base.dim();
  n->parts = {std::move(base)};
  n->labels = std::move(labels);
  n->label = label;
  return Region(n);
}

Region Region::predicate(Region base, std::function<bool(const Eigen::VectorXd&)> test, std::string description) {
  if (!test) throw Error(ErrorCode::invalid_argument, "empty region predicate");
  auto n = std::make_shared<Node>();
  n->kind = Kind::predicate;
  n->dim = base.dim();
  n->parts = {std::move(base)};
  n->test = std::move(test);
  n->text = std::move(description);
  return Region(n);
}

Region::Kind Region::kind() const { return node_->kind; }
std::size_t Region::dim() const { return node_->dim; }

bool Region::contains(const Eigen::VectorXd& x) const {
  const Node& n = *node_;
  if (static_cast<std::size_t>(x.size()) != n.dim) throw Error(ErrorCode::dim_mismatch, "region membership");
  switch (n.kind) {
    case Kind::full_space:
      return true;
    case Kind::ball: {
      Eigen::VectorXd d = x - n.center;
      double r = n.gamma ? std::sqrt(std::max(0.0, d.dot(n.gram * d))) : d.norm();
      return r < n.radius;
    }
    case Kind::annulus: {
      double r = x.norm();
      return r > n.inner && r < n.outer;
    }
    case Kind::sector: {
      double r = x.norm();
      if (!(r > n.inner && r < n.outer)) return false;
      double rel = wrap_angle(std::atan2(x[1], x[0]) - n.from);
      return rel > 0 && rel < n.to - n.from;
    }
    case Kind::finite_union:
      for (const auto& p : n.parts) {
        if (p.contains(x)) return true;
      }
      return false;
    case Kind::intersection:
      for (const auto& p : n.parts) {
        if (!p.contains(x)) return false;
      }
      return true;
    case Kind::affine_image:
      return n.parts.front().contains(n.linear_inverse * (x - n.offset));
    case Kind::component: {
      if (!n.parts.front().contains(x)) return false;
      // The point belongs to the component of the nearest labelled grid
      // point, searched in growing shells around its cell.
      const GridSpec& g = n.labels->grid;
      const std::size_t dim = n.dim;
      std::vector<long> base(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        base[i] = static_cast<long>(
            std::floor((x[static_cast<Eigen::Index>(i)] - g.lower[static_cast<Eigen::Index>(i)]) / g.spacing));
      }
      for (long reach = 1; reach <= 4; ++reach) {
        double best = kInf;
        int best_label = -1;
        const long side = 2 * reach;
        std::size_t total = 1;
        for (std::size_t i = 0; i < dim; ++i) total *= static_cast<std::size_t>(side);
        std::vector<std::size_t> c(dim);
        for (std::size_t k = 0; k < total; ++k) {
          std::size_t rest = k;
          bool ok = true;
          for (std::size_t i = 0; i < dim; ++i) {
            long v = base[i] - reach + 1 + static_cast<long>(rest % static_cast<std::size_t>(side));
            rest /= static_cast<std::size_t>(side);
            if (v < 0 || v >= static_cast<long>(g.counts[i])) {
              ok = false;
              break;
            }
            c[i] = static_cast<std::size_t>(v);
          }
          if (!ok) continue;
          const std::size_t idx = g.index(c);
          if (n.labels->labels[idx] < 0) continue;
          double d = (g.point(idx) - x).squaredNorm();
          if (d < best) {
            best = d;
            best_label = n.labels->labels[idx];
          }
        }
        if (best_label >= 0) return best_label == n.label;
      }
      return false;
    }
    case Kind::predicate:
      return n.parts.front().contains(x) && n.test(x);
  }
  return false;
}

bool Region::is_bounded() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::full_space: return false;
    case Kind::ball: return true;
    case Kind::annulus:
    case Kind::sector: return std::isfinite(n.outer);
    case Kind::finite_union:
      for (const auto& p : n.parts) {
        if (!p.is_bounded()) return false;
      }
      return true;
    case Kind::intersection:
      for (const auto& p : n.parts) {
        if (p.is_bounded()) return true;
      }
      return false;
    case Kind::affine_image: return n.parts.front().is_bounded();
    case Kind::component: return true;
    case Kind::predicate: return n.parts.front().is_bounded();
  }
  return false;
}

Box Region::bounding_box(double window) const {
  const Node& n = *node_;
  const auto d = static_cast<Eigen::Index>(n.dim);
  Box box{Eigen::VectorXd::Constant(d, -window), Eigen::VectorXd::Constant(d, window)};
  switch (n.kind) {
    case Kind::full_space:
      break;
    case Kind::ball: {
      double reach = n.radius;
      if (n.gamma) {
        // Smallest eigenvalue of the Gram matrix bounds the Euclidean reach.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(n.gram);
        reach = n.radius / std::sqrt(std::max(es.eigenvalues().minCoeff(), 1e-300));
      }
      box.lower = n.center.array() - reach;
      box.upper = n.center.array() + reach;
      break;
    }
    case Kind::annulus:
    case Kind::sector:
      if (std::isfinite(n.outer)) {
        box.lower.setConstant(-n.outer);
        box.upper.setConstant(n.outer);
      }
      break;
    case Kind::finite_union: {
      box.lower.setConstant(std::numeric_limits<double>::infinity());
      box.upper.setConstant(-std::numeric_limits<double>::infinity());
      for (const auto& p : n.parts) {
        Box b = p.bounding_box(window);
        box.lower = box.lower.cwiseMin(b.lower);
        box.upper = box.upper.cwiseMax(b.upper);
      }
      break;
    }
    case Kind::intersection: {
      box.lower.setConstant(-std::numeric_limits<double>::infinity());
      box.upper.setConstant(std::numeric_limits<double>::infinity());
      for (const auto& p : n.parts) {
        Box b = p.bounding_box(window);
        box.lower = box.lower.cwiseMax(b.lower);
        box.upper = box.upper.cwiseMin(b.upper);
      }
      box.upper = box.upper.cwiseMax(box.lower);
      break;
    }
    case Kind::affine_image: {
      Box b = n.parts.front().bounding_box(window);
      box.lower.setConstant(std::numeric_limits<double>::infinity());
      box.upper.setConstant(-std::numeric_limits<double>::infinity());
      for (std::size_t mask = 0; mask < (std::size_t{1} << n.dim); ++mask) {
        Eigen::VectorXd corner = b.lower;
        for (Eigen::Index i = 0; i < d; ++i) {
          if (mask & (std::size_t{1} << i)) corner[i] = b.upper[i];
        }
        Eigen::VectorXd img = n.linear * corner + n.offset;
        box.lower = box.lower.cwiseMin(img);
        box.upper = box.upper.cwiseMax(img);
      }
      break;
    }
    case Kind::component: {
      const GridSpec& g = n.labels->grid;
      box.lower.setConstant(std::numeric_limits<double>::infinity());
      box.upper.setConstant(-std::numeric_limits<double>::infinity());
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (n.labels->labels[k] != n.label) continue;
        Eigen::VectorXd p = g.point(k);
        box.lower = box.lower.cwiseMin(p);
        box.upper = box.upper.cwiseMax(p);
      }
      box.lower.array() -= g.spacing;
      box.upper.array() += g.spacing;
      break;
    }
    case Kind::predicate:
      return n.parts.front().bounding_box(window);
  }
  return box;
}

Eigen::VectorXd Region::loop_center() const {
  const Node& n = *node_;
  const auto d = static_cast<Eigen::Index>(n.dim);
  switch (n.kind) {
    case Kind::ball: return n.center;
    case Kind::sector: {
      double r = std::isfinite(n.outer) ? 0.5 * (n.inner + n.outer) : n.inner + 1;
      double a = 0.5 * (n.from + n.to);
      Eigen::VectorXd c(2);
      c << r * std::cos(a), r * std::sin(a);
      return c;
    }
    case Kind::finite_union:
    case Kind::intersection: return n.parts.front().loop_center();
    case Kind::affine_image: return n.linear * n.parts.front().loop_center() + n.offset;
    case Kind::component: {
      // Labelled grid point nearest the box center.
      Box b = bounding_box();
      Eigen::VectorXd mid = 0.5 * (b.lower + b.upper);
      const GridSpec& g = n.labels->grid;
      double best = kInf;
      Eigen::VectorXd out = mid;
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (n.labels->labels[k] != n.label) continue;
        Eigen::VectorXd p = g.point(k);
        double dist = (p - mid).squaredNorm();
        if (dist < best) {
          best = dist;
          out = p;
        }
      }
      return out;
    }
    case Kind::predicate: return n.parts.front().loop_center();
    default: return Eigen::VectorXd::Zero(d);
  }
}

const Eigen::VectorXd& Region::center() const { return node_->center; }
double Region::radius() const { return node_->radius; }
double Region::inner() const { return node_->inner; }
double Region::outer() const { return node_->outer; }
double Region::from_angle() const { return node_->from; }
double Region::to_angle() const { return node_->to; }
const Eigen::MatrixXd& Region::gram() const { return node_->gram; }
bool Region::uses_gram() const { return node_->gamma; }
const std::vector<Region>& Region::parts() const { return node_->parts; }
const Eigen::MatrixXd& Region::linear() const { return node_->linear; }
const Eigen::VectorXd& Region::offset() const { return node_->offset; }

std::string Region::describe() const {
  const Node& n = *node_;
  std::ostringstream os;
  os.precision(6);
  switch (n.kind) {
    case Kind::full_space: os << "R^" << n.dim; break;
    case Kind::ball:
      os << (n.gamma ? "gamma-ball(" : "ball(") << "(" << n.center.transpose() << ")," << n.radius << ")";
      break;
    case Kind::annulus: os << "annulus(" << n.inner << "," << n.outer << ")"; break;
    case Kind::sector: os << "sector(" << n.inner << "," << n.outer << "," << n.from << "," << n.to << ")"; break;
    case Kind::finite_union:
    case Kind::intersection: {
      os << (n.kind == Kind::finite_union ? "union(" : "intersection(");
      for (std::size_t i = 0; i < n.parts.size(); ++i) os << (i ? "," : "") << n.parts[i].describe();
      os << ")";
      break;
    }
    case Kind::affine_image: os << "affine-image(" << n.parts.front().describe() << ")"; break;
    case Kind::component: os << "component#" << n.label << "(" << n.parts.front().describe() << ")"; break;
    case Kind::predicate: os << n.text << "(" << n.parts.front().describe() << ")"; break;
  }
  return os.str();
}

std::size_t GridSpec::size() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<std::size_t> GridSpec::coords(std::size_t index) const {
  std::vector<std::size_t> c(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    c[i] = index % counts[i];
    index /= counts[i];
  }
  return c;
}

std::size_t GridSpec::index(const std::vector<std::size_t>& c) const {
  std::size_t idx = 0;
  for (std::size_t i = counts.size(); i-- > 0;) idx = idx * counts[i] + c[i];
  return idx;
}

Eigen::VectorXd GridSpec::point(std::size_t index) const {
  Eigen::VectorXd p = lower;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[static_cast<Eigen::Index>(i)] += spacing * static_cast<double>(index % counts[i]);
    index /= counts[i];
  }
  return p;
}

GridSpec make_grid(const Region& region, std::size_t resolution, double window) {
  if (resolution < 2) throw Error(ErrorCode::invalid_argument, "grid resolution must be >= 2");
  Box box = region.bounding_box(window);
  double longest = (box.upper - box.lower).maxCoeff();
  if (!(longest > 0)) longest = 1;
  GridSpec g;
  g.spacing = longest / static_cast<double>(resolution);
  // Offset by half a cell so grid points avoid the symmetric centers
  // (origins, axes) where many regions have boundaries.
  g.lower = box.lower.array() + 0.5 * g.spacing;
  for (Eigen::Index i = 0; i < box.lower.size(); ++i) {
    double side = box.upper[i] - box.lower[i];
    g.counts.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(side / g.spacing))));
  }
  return g;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

GridLabels label_components(const Region& region, const GridSpec& grid) {
  const std::size_t total = grid.size();
  std::vector<char> inside = kernels::parallel::grid_membership(region, grid);
  std::vector<std::size_t> parent(total);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::size_t stride = 1;
  for (std::size_t axis = 0; axis < grid.counts.size(); ++axis) {
    for (std::size_t k = 0; k < total; ++k) {
      if (!inside[k]) continue;
      std::size_t coord = (k / stride) % grid.counts[axis];
      if (coord + 1 >= grid.counts[axis]) continue;
      std::size_t nb = k + stride;
      if (!inside[nb]) continue;
      std::size_t a = find_root(parent, k);
      std::size_t b = find_root(parent, nb);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    stride *= grid.counts[axis];
  }
  GridLabels out;
  out.grid = grid;
  out.labels.assign(total, -1);
  std::vector<int> root_label(total, -1);
  for (std::size_t k = 0; k < total; ++k) {
    if (!inside[k]) continue;
    std::size_t r = find_root(parent, k);
    if (root_label[r] < 0) root_label[r] = out.component_count++;
    out.labels[k] = root_label[r];
  }
  return out;
}

GridLabels label_components(const Region& region, std::size_t resolution, double window) {
  return label_components(region, make_grid(region, resolution, window));
}

bool is_connected(const Region& region, std::size_t resolution, double window) {
  return label_components(region, resolution, window).component_count == 1;
}

Eigen::VectorXd sample_box(const Box& box, Rng& rng) {
  Eigen::VectorXd p(box.lower.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform(box.lower[i], box.upper[i]);
  return p;
}

std::vector<Eigen::VectorXd> sample_region(const Region& region, std::size_t count, std::uint64_t seed, double window) {
  Rng rng(seed);
  Box box = region.bounding_box(window);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 2000 * std::max<std::size_t>(count, 1) + 100000;
  while (out.size() < count) {
    if (++attempts > max_attempts) {
      throw Error(ErrorCode::invalid_argument, "could not sample region " + region.describe());
    }
    Eigen::VectorXd p = sample_box(box, rng);
    if (region.contains(p)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace orbi
