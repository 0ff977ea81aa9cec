#include "orbi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orbi/error.hpp"

namespace orbi::kernels {

namespace {

long match_one(const FiniteMatrixGroup& group, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double tol) {
  const double bound = tol * std::max(1.0, x.norm());
  long found = kNoMatch;
  for (std::size_t g = 0; g < group.order(); ++g) {
    if ((group.real_element(g) * x - y).norm() <= bound) {
      if (found != kNoMatch) return kManyMatches;
      found = static_cast<long>(g);
    }
  }
  return found;
}

double equivariance_one(const RealMap& f, const FiniteMatrixGroup& source, const FiniteMatrixGroup& target,
                        const std::vector<std::size_t>& hom, const Eigen::VectorXd& x) {
  try {
    Eigen::VectorXd fx = f(x);
    double worst = 0;
    for (std::size_t g = 0; g < source.order(); ++g) {
      Eigen::VectorXd lhs = f(source.real_element(g) * x);
      Eigen::VectorXd rhs = target.real_element(hom[g]) * fx;
      double e = (lhs - rhs).norm();
      if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, e);
    }
    return worst;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

void check_sizes(const std::vector<Eigen::VectorXd>& points, const std::vector<Eigen::VectorXd>& images) {
  if (points.size() != images.size()) throw Error(ErrorCode::dim_mismatch, "points and images differ in count");
}

void check_hom(const FiniteMatrixGroup& source, const std::vector<std::size_t>& hom) {
  if (hom.size() != source.order()) throw Error(ErrorCode::dim_mismatch, "homomorphism size differs from group order");
}

}  // namespace

namespace serial {

std::vector<char> grid_membership(const Region& region, const GridSpec& grid) {
  std::vector<char> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = region.contains(grid.point(k)) ? 1 : 0;
  return out;
}

std::vector<long> match_elements(const FiniteMatrixGroup& group, const std::vector<Eigen::VectorXd>& points,
                                 const std::vector<Eigen::VectorXd>& images, double tol) {
  check_sizes(points, images);
  std::vector<long> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = match_one(group, points[i], images[i], tol);
  return out;
}

double equivariance_error(const RealMap& f, const FiniteMatrixGroup& source, const FiniteMatrixGroup& target,
                          const std::vector<std::size_t>& hom, const std::vector<Eigen::VectorXd>& points) {
  check_hom(source, hom);
  double worst = 0;
  for (const auto& x : points) worst = std::max(worst, equivariance_one(f, source, target, hom, x));
  return worst;
}

}  // namespace serial

namespace parallel {

std::vector<char> grid_membership(const Region& region, const GridSpec& grid) {
  const auto total = static_cast<long>(grid.size());
  std::vector<char> out(grid.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < total; ++k) {
    out[static_cast<std::size_t>(k)] = region.contains(grid.point(static_cast<std::size_t>(k))) ? 1 : 0;
  }
  return out;
}

std::vector<long> match_elements(const FiniteMatrixGroup& group, const std::vector<Eigen::VectorXd>& points,
                                 const std::vector<Eigen::VectorXd>& images, double tol) {
  check_sizes(points, images);
  const auto n = static_cast<long>(points.size());
  std::vector<long> out(points.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(i);
    out[k] = match_one(group, points[k], images[k], tol);
  }
  return out;
}

double equivariance_error(const RealMap& f, const FiniteMatrixGroup& source, const FiniteMatrixGroup& target,
                          const std::vector<std::size_t>& hom, const std::vector<Eigen::VectorXd>& points) {
  check_hom(source, hom);
  const auto n = static_cast<long>(points.size());
  double worst = 0;
#pragma omp parallel for reduction(max : worst) schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    worst = std::max(worst, equivariance_one(f, source, target, hom, points[static_cast<std::size_t>(i)]));
  }
  return worst;
}

}  // namespace parallel

}  // namespace orbi::kernels
