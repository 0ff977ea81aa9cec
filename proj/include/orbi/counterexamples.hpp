#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "orbi/atlas.hpp"
#include "orbi/group.hpp"
#include "orbi/lifting.hpp"
#include "orbi/map_expr.hpp"

namespace orbi {

/// Number of bump intervals written out in the piecewise examples. Below
/// 1/(kBumpTerms+1) the factor e^(-1/r) is under 1e-26 and the maps are 0.
inline constexpr int kBumpTerms = 60;

/// Finite prefix of signs; indices past the end read as +1.
struct SignSequence {
  std::vector<int> signs;

  int operator[](std::size_t n) const;  // n >= 1
};

MapExpr bump(int n);
MapExpr example1_map(const SignSequence& eps);
MapExpr example2_map();

/// g(r) = bump(1)(r) * r.
MapExpr default_halfangle_profile();
/// (r cos t, r sin t) -> (g(r) cos(t/2), g(r) sin(t/2)) with t in (-pi, pi].
MapExpr halfangle_expr(const MapExpr& g);
/// The same map read into R^2/{+-I}, where it is well defined.
QuotientMap halfangle_map(const MapExpr& g, Region source_region);
QuotientMap halfangle_map(const MapExpr& g);

// Groups used throughout the fixtures and tests.
FiniteMatrixGroup sign_group(std::size_t dim);
/// Rotations by multiples of 2 pi / m in the plane; exact for m = 1, 2, 4.
FiniteMatrixGroup rotation_group(int m);
/// {diag(+-1, +-1)}.
FiniteMatrixGroup dihedral4();
/// {I, diag(1,-1)}.
FiniteMatrixGroup mirror_group();
/// a g a^-1 for every element.
FiniteMatrixGroup conjugate_group(const FiniteMatrixGroup& g, const Matrix& a);

// Named atlases.
Atlas bad_union_f();
Atlas bad_union_fprime();
Atlas bad_union_fsecond();
/// Links between any two of the three bad-union families.
LinkSet bad_union_cross(const Atlas& p, const Atlas& q);
Atlas teardrop(int p);
Atlas football(int p, int q);
Atlas mirror();

/// Names accepted by fixture(): example1 example2 halfangle bad-union-F
/// bad-union-Fprime bad-union-Fsecond bad-union-X-union-Y teardrop(p)
/// football(p,q) mirror. The map fixtures have no atlas.
std::vector<std::string> fixture_names();
bool is_atlas_fixture(const std::string& name);
Atlas atlas_fixture(const std::string& name);

/// Two selections whose images cover the underlying space of a valid atlas
/// fixture, each a topological ball.
std::vector<Selection> locality_cover(const std::string& name);

}  // namespace orbi
