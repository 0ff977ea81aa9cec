#include "orbi/conjugacy.hpp"

#include <cmath>
#include <deque>
#include <random>

namespace orbi {

namespace {

struct Invariants {
  std::size_t order;
  Scalar trace;
  Scalar det;
};

bool same_invariants(const Invariants& a, const Invariants& b, double tol) {
  return a.order == b.order && approx_equal(a.trace, b.trace, tol) && approx_equal(a.det, b.det, tol);
}

// Extends images of the first gen_images.size() generators over the subgroup
// they generate. Returns false on a multiplicativity conflict. `image` uses
// `unset` for elements outside that subgroup.
constexpr std::size_t unset = static_cast<std::size_t>(-1);

bool extend_partial(const FiniteMatrixGroup& g, const FiniteMatrixGroup& h, const std::vector<std::size_t>& gen_images,
                    std::vector<std::size_t>& image) {
  image.assign(g.order(), unset);
  image[0] = 0;
  std::deque<std::size_t> queue{0};
  const auto& gens = g.generators();
  while (!queue.empty()) {
    std::size_t e = queue.front();
    queue.pop_front();
    for (std::size_t k = 0; k < gen_images.size(); ++k) {
      std::size_t p = g.multiply(e, gens[k]);
      std::size_t q = h.multiply(image[e], gen_images[k]);
      if (image[p] == unset) {
        image[p] = q;
        queue.push_back(p);
      } else if (image[p] != q) {
        return false;
      }
    }
  }
  // Injectivity on the generated part.
  std::vector<bool> hit(h.order(), false);
  for (auto q : image) {
    if (q == unset) continue;
    if (hit[q]) return false;
    hit[q] = true;
  }
  return true;
}

// Solution space of L g_k - h(g_k) L = 0 over all generators, as n x n matrices.
std::vector<Matrix> intertwiner_space(const FiniteMatrixGroup& g, const FiniteMatrixGroup& h,
                                      const GroupHomomorphism& hom, bool exact, double tol) {
  const std::size_t n = g.dim();
  const auto& gens = g.generators();
  const std::size_t eqs = std::max<std::size_t>(gens.size(), 1) * n * n;
  Matrix system(eqs, n * n);
  if (!exact) system = system.to_approx();
  std::size_t row = 0;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    Matrix a = g.element(gens[k]);
    Matrix b = h.element(hom.image[gens[k]]);
    if (!exact) {
      a = a.to_approx();
      b = b.to_approx();
    }
    // (L a)_{ij} - (b L)_{ij} = sum_m L_{im} a_{mj} - sum_m b_{im} L_{mj}
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j, ++row) {
        for (std::size_t m = 0; m < n; ++m) {
          system(row, i * n + m) += a(m, j);
          system(row, m * n + j) -= b(i, m);
        }
      }
    }
  }
  std::vector<Matrix> out;
  for (const auto& v : kernel(system, tol, 1.0)) {
    Matrix l(n, n, v.entries());
    out.push_back(std::move(l));
  }
  return out;
}

std::optional<Matrix> invertible_combination(const std::vector<Matrix>& basis, bool exact, double tol) {
  if (basis.empty()) return std::nullopt;
  for (const auto& b : basis) {
    if (is_invertible(b, tol)) return b;
  }
  // A generic combination of the basis is invertible iff any element of the
  // space is; a handful of seeded integer combinations settles it with
  // overwhelming probability.
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> coef(-7, 7);
  for (int attempt = 0; attempt < 16; ++attempt) {
    Matrix l = 0 * basis.front();
    if (!exact) l = l.to_approx();
    for (const auto& b : basis) {
      int c = coef(rng);
      if (c == 0) c = 1;
      l = l + Scalar(c) * b;
    }
    if (is_invertible(l, tol)) return l;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Conjugacy> conjugate_in_gl(const FiniteMatrixGroup& g, const FiniteMatrixGroup& h, std::size_t budget) {
  if (g.dim() != h.dim()) throw Error(ErrorCode::dim_mismatch, "conjugate_in_gl: groups act on different dimensions");
  if (g.order() != h.order()) return std::nullopt;
  const bool exact = g.mode() == ScalarMode::exact && h.mode() == ScalarMode::exact;
  const double tol = std::max(g.tolerance(), h.tolerance());
  if (g.is_trivial()) {
    return Conjugacy{exact ? Matrix::identity(g.dim()) : Matrix::identity(g.dim()).to_approx(), GroupHomomorphism{{0}}};
  }

  auto invariants = [&](const FiniteMatrixGroup& grp, std::size_t i) {
    return Invariants{grp.element_order(i), grp.element(i).trace(), determinant(grp.element(i), tol)};
  };
  const auto& gens = g.generators();
  std::vector<std::vector<std::size_t>> candidates(gens.size());
  for (std::size_t k = 0; k < gens.size(); ++k) {
    Invariants gi = invariants(g, gens[k]);
    for (std::size_t j = 1; j < h.order(); ++j) {
      if (same_invariants(gi, invariants(h, j), tol * 10)) candidates[k].push_back(j);
    }
    if (candidates[k].empty()) return std::nullopt;
  }

  std::size_t tried = 0;
  std::vector<std::size_t> gen_images;
  std::vector<std::size_t> image;
  std::optional<Conjugacy> found;
  // Depth-first over generator images; a prefix is abandoned as soon as it
  // fails to extend multiplicatively.
  auto search = [&](auto&& self, std::size_t depth) -> void {
    if (found) return;
    if (depth == gens.size()) {
      GroupHomomorphism hom{image};
      if (!is_homomorphism(g, h, hom)) return;
      auto space = intertwiner_space(g, h, hom, exact, tol);
      if (auto l = invertible_combination(space, exact, tol)) found = Conjugacy{*l, hom};
      return;
    }
    for (std::size_t cand : candidates[depth]) {
      if (++tried > budget) throw Error(ErrorCode::budget_exceeded, "conjugacy search exceeded its assignment budget");
      gen_images.push_back(cand);
      if (extend_partial(g, h, gen_images, image)) self(self, depth + 1);
      gen_images.pop_back();
      if (found) return;
    }
  };
  search(search, 0);
  return found;
}

}  // namespace orbi
