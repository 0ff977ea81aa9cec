#include "orbi/group.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace orbi {

std::string FiniteMatrixGroup::key(const Matrix& m) const {
  std::string k;
  for (const auto& e : m.entries()) {
    k += e.to_string();
    k += ';';
  }
  return k;
}

std::optional<std::size_t> FiniteMatrixGroup::find(const Matrix& m) const {
  if (m.rows() != dim_ || m.cols() != dim_) return std::nullopt;
  if (mode_ == ScalarMode::exact && m.is_exact()) {
    auto it = exact_index_.find(key(m));
    if (it == exact_index_.end()) return std::nullopt;
    return it->second;
  }
  return find_real(m.to_real(), tolerance_);
}

std::optional<std::size_t> FiniteMatrixGroup::find_real(const Eigen::MatrixXd& m, double tol) const {
  if (m.rows() != static_cast<Eigen::Index>(dim_) || m.cols() != static_cast<Eigen::Index>(dim_)) return std::nullopt;
  std::optional<std::size_t> best;
  double best_d = tol * std::sqrt(static_cast<double>(dim_));
  for (std::size_t i = 0; i < real_.size(); ++i) {
    double d = (real_[i] - m).norm();
    if (d <= best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::size_t FiniteMatrixGroup::add_element(Matrix m) {
  std::size_t idx = elements_.size();
  if (mode_ == ScalarMode::exact) exact_index_.emplace(key(m), idx);
  real_.push_back(m.to_real());
  elements_.push_back(std::move(m));
  return idx;
}

void FiniteMatrixGroup::build_tables() {
  const std::size_t n = order();
  table_.assign(n * n, 0);
  inverses_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::optional<std::size_t> k;
      if (mode_ == ScalarMode::exact) {
        k = find(elements_[i] * elements_[j]);
      } else {
        k = find_real(real_[i] * real_[j], tolerance_);
      }
      if (!k) throw Error(ErrorCode::not_finite, "element set is not closed under multiplication");
      table_[i * n + j] = *k;
      if (*k == 0) inverses_[i] = j;
    }
  }
}

void FiniteMatrixGroup::pick_generators() {
  generators_.clear();
  const std::size_t n = order();
  std::vector<bool> reached(n, false);
  reached[0] = true;
  std::size_t count = 1;
  for (std::size_t cand = 1; cand < n && count < n; ++cand) {
    if (reached[cand]) continue;
    generators_.push_back(cand);
    // Recompute the generated subgroup by closing under the chosen generators.
    std::fill(reached.begin(), reached.end(), false);
    reached[0] = true;
    std::deque<std::size_t> queue{0};
    count = 1;
    while (!queue.empty()) {
      std::size_t e = queue.front();
      queue.pop_front();
      for (std::size_t g : generators_) {
        std::size_t p = multiply(e, g);
        if (!reached[p]) {
          reached[p] = true;
          ++count;
          queue.push_back(p);
        }
      }
    }
  }
}

std::size_t FiniteMatrixGroup::element_order(std::size_t i) const {
  std::size_t k = 1;
  std::size_t p = i;
  while (p != 0) {
    p = multiply(p, i);
    ++k;
  }
  return k;
}

FiniteMatrixGroup FiniteMatrixGroup::subgroup(const std::vector<std::size_t>& indices) const {
  if (indices.empty() || indices.front() != 0) throw Error(ErrorCode::invalid_argument, "subgroup must list the identity first");
  FiniteMatrixGroup h;
  h.dim_ = dim_;
  h.mode_ = mode_;
  h.tolerance_ = tolerance_;
  for (auto i : indices) h.add_element(elements_.at(i));
  const std::size_t n = indices.size();
  std::unordered_map<std::size_t, std::size_t> local;
  for (std::size_t k = 0; k < n; ++k) local.emplace(indices[k], k);
  h.table_.assign(n * n, 0);
  h.inverses_.assign(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      auto it = local.find(multiply(indices[a], indices[b]));
      if (it == local.end()) throw Error(ErrorCode::invalid_argument, "indices are not closed under multiplication");
      h.table_[a * n + b] = it->second;
      if (it->second == 0) h.inverses_[a] = b;
    }
  }
  h.pick_generators();
  return h;
}

std::string FiniteMatrixGroup::describe() const {
  std::string out = "{";
  for (std::size_t i = 0; i < order(); ++i) {
    if (i) out += ", ";
    out += elements_[i].to_string();
  }
  return out + "}";
}

FiniteMatrixGroup close_generators(const std::vector<Matrix>& gens, std::size_t cap, double tol) {
  if (gens.empty()) throw Error(ErrorCode::invalid_argument, "close_generators needs at least one generator");
  const std::size_t n = gens.front().rows();
  bool exact = true;
  for (const auto& g : gens) {
    if (!g.is_square()) throw Error(ErrorCode::non_square, "generator is not square");
    if (g.rows() != n) throw Error(ErrorCode::dim_mismatch, "generators have different dimensions");
    if (!is_invertible(g, tol)) throw Error(ErrorCode::singular, "generator " + g.to_string() + " is not invertible");
    exact = exact && g.is_exact();
  }
  FiniteMatrixGroup group;
  group.dim_ = n;
  group.mode_ = exact ? ScalarMode::exact : ScalarMode::approx;
  group.tolerance_ = tol;
  Matrix id = Matrix::identity(n);
  group.add_element(exact ? id : id.to_approx());

  std::vector<Matrix> work;
  for (const auto& g : gens) work.push_back(exact ? g : g.to_approx());

  for (std::size_t head = 0; head < group.elements_.size(); ++head) {
    for (const auto& g : work) {
      Matrix p = group.elements_[head] * g;
      bool known = exact ? group.find(p).has_value() : group.find_real(p.to_real(), tol).has_value();
      if (known) continue;
      if (group.elements_.size() >= cap) {
        throw Error(ErrorCode::not_finite, "closure exceeded " + std::to_string(cap) + " elements");
      }
      group.add_element(std::move(p));
    }
  }
  group.build_tables();
  group.pick_generators();
  return group;
}

FiniteMatrixGroup trivial_group(std::size_t dim) {
  FiniteMatrixGroup group;
  group.dim_ = dim;
  group.add_element(Matrix::identity(dim));
  group.build_tables();
  return group;
}

bool GroupHomomorphism::is_injective() const {
  std::vector<std::size_t> sorted = image;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

bool GroupHomomorphism::is_identity_map() const {
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (image[i] != i) return false;
  }
  return true;
}

bool GroupHomomorphism::is_trivial() const {
  return std::all_of(image.begin(), image.end(), [](std::size_t k) { return k == 0; });
}

bool is_homomorphism(const FiniteMatrixGroup& source, const FiniteMatrixGroup& target, const GroupHomomorphism& h) {
  if (h.image.size() != source.order()) return false;
  if (h.image[0] != 0) return false;
  for (auto k : h.image) {
    if (k >= target.order()) return false;
  }
  for (std::size_t i = 0; i < source.order(); ++i) {
    for (std::size_t j = 0; j < source.order(); ++j) {
      if (h.image[source.multiply(i, j)] != target.multiply(h.image[i], h.image[j])) return false;
    }
  }
  return true;
}

namespace {

void check_dim(const FiniteMatrixGroup& g, std::size_t d) {
  if (g.dim() != d) throw Error(ErrorCode::dim_mismatch, "point dimension does not match group dimension");
}

}  // namespace

std::vector<std::size_t> stabilizer_indices(const FiniteMatrixGroup& g, const Vector& u) {
  check_dim(g, u.dim());
  if (g.mode() == ScalarMode::approx || !u.is_exact()) return stabilizer_indices(g, u.to_real(), g.tolerance());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.order(); ++i) {
    if (equal(g.element(i) * u, u, 0)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> stabilizer_indices(const FiniteMatrixGroup& g, const Eigen::VectorXd& u, double tol) {
  check_dim(g, static_cast<std::size_t>(u.size()));
  const double scale = std::max(1.0, u.norm());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.order(); ++i) {
    if ((g.real_element(i) * u - u).norm() <= tol * scale) out.push_back(i);
  }
  return out;
}

FiniteMatrixGroup stabilizer(const FiniteMatrixGroup& g, const Vector& u) { return g.subgroup(stabilizer_indices(g, u)); }

FiniteMatrixGroup stabilizer(const FiniteMatrixGroup& g, const Eigen::VectorXd& u, double tol) {
  return g.subgroup(stabilizer_indices(g, u, tol));
}

std::vector<Vector> orbit(const FiniteMatrixGroup& g, const Vector& u) {
  check_dim(g, u.dim());
  std::vector<Vector> out;
  const double tol = g.tolerance() * std::max(1.0, u.to_real().norm());
  for (const auto& m : g.elements()) {
    Vector p = m * u;
    bool seen = std::any_of(out.begin(), out.end(), [&](const Vector& q) { return equal(p, q, tol); });
    if (!seen) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Eigen::VectorXd> orbit(const FiniteMatrixGroup& g, const Eigen::VectorXd& u, double tol) {
  check_dim(g, static_cast<std::size_t>(u.size()));
  const double scaled = tol * std::max(1.0, u.norm());
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < g.order(); ++i) {
    Eigen::VectorXd p = g.real_element(i) * u;
    bool seen = std::any_of(out.begin(), out.end(), [&](const Eigen::VectorXd& q) { return (p - q).norm() <= scaled; });
    if (!seen) out.push_back(std::move(p));
  }
  return out;
}

InvariantGram invariant_gram(const FiniteMatrixGroup& g) {
  const std::size_t n = g.dim();
  Matrix gram(n, n);
  if (g.mode() == ScalarMode::approx) gram = gram.to_approx();
  for (const auto& m : g.elements()) gram = gram + m.transpose() * m;
  return {gram, gram.to_real()};
}

Scalar gamma_norm(const InvariantGram& gr, const Vector& v) {
  if (v.dim() != gr.gram.rows()) throw Error(ErrorCode::dim_mismatch, "gamma_norm");
  if (gr.gram.is_exact() && v.is_exact()) {
    Vector gv = gr.gram * v;
    Scalar s = 0;
    for (std::size_t i = 0; i < v.dim(); ++i) s += v[i] * gv[i];
    return s;
  }
  return Scalar::real(gamma_norm(gr, v.to_real()));
}

double gamma_norm(const InvariantGram& gr, const Eigen::VectorXd& v) {
  if (v.size() != gr.real.rows()) throw Error(ErrorCode::dim_mismatch, "gamma_norm");
  return std::sqrt(std::max(0.0, v.dot(gr.real * v)));
}

bool is_reflection(const Matrix& g, double tol) { return codimension(fixed_subspace(g, tol)) == 1; }

bool is_reflection_free(const FiniteMatrixGroup& g) {
  for (std::size_t i = 1; i < g.order(); ++i) {
    if (is_reflection(g.element(i), g.tolerance())) return false;
  }
  return true;
}

}  // namespace orbi
