#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "orbi/group.hpp"
#include "orbi/linalg.hpp"
#include "orbi/region.hpp"

// Batch kernels. Each exists as a serial reference and an OpenMP version;
// both must return identical results.
namespace orbi::kernels {

inline constexpr long kNoMatch = -1;
inline constexpr long kManyMatches = -2;

namespace serial {

std::vector<char> grid_membership(const Region& region, const GridSpec& grid);

// For each i, the index of the unique group element g with
// |images[i] - g points[i]| <= tol * max(1, |points[i]|), or kNoMatch / kManyMatches.
std::vector<long> match_elements(const FiniteMatrixGroup& group, const std::vector<Eigen::VectorXd>& points,
                                 const std::vector<Eigen::VectorXd>& images, double tol);

// max over samples x and source elements g of |f(g x) - h(g) f(x)|.
// Evaluation failures count as +inf.
double equivariance_error(const RealMap& f, const FiniteMatrixGroup& source, const FiniteMatrixGroup& target,
                          const std::vector<std::size_t>& hom, const std::vector<Eigen::VectorXd>& points);

}  // namespace serial

namespace parallel {

std::vector<char> grid_membership(const Region& region, const GridSpec& grid);
std::vector<long> match_elements(const FiniteMatrixGroup& group, const std::vector<Eigen::VectorXd>& points,
                                 const std::vector<Eigen::VectorXd>& images, double tol);
double equivariance_error(const RealMap& f, const FiniteMatrixGroup& source, const FiniteMatrixGroup& target,
                          const std::vector<std::size_t>& hom, const std::vector<Eigen::VectorXd>& points);

}  // namespace parallel

}  // namespace orbi::kernels
