#pragma once

#include <cstddef>
#include <optional>

#include "orbi/group.hpp"

namespace orbi {

inline constexpr std::size_t kDefaultConjugacyBudget = 1000000;

struct Conjugacy {
  Matrix intertwiner;  // L with L g L^-1 = h(g)
  GroupHomomorphism isomorphism;
};

/// Searches for an invertible L and an isomorphism h : G -> H with
/// L g L^-1 = h(g) for all g.
///
/// Isomorphisms are enumerated on G's generators (images must match element
/// order, trace and determinant) and pruned as soon as the partial
/// assignment fails to extend multiplicatively. For each complete candidate
/// the linear system L g_k = h(g_k) L is solved over the generators and an
/// invertible element of its solution space is sought. Throws
/// BudgetExceeded once more than `budget` generator assignments have been
/// tried.
std::optional<Conjugacy> conjugate_in_gl(const FiniteMatrixGroup& g, const FiniteMatrixGroup& h,
                                         std::size_t budget = kDefaultConjugacyBudget);

}  // namespace orbi
