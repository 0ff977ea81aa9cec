#include "orbi/error.hpp"

namespace orbi {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::non_square: return "NonSquare";
    case ErrorCode::dim_mismatch: return "DimMismatch";
    case ErrorCode::evaluation_error: return "EvaluationError";
    case ErrorCode::not_finite: return "NotFinite";
    case ErrorCode::singular: return "Singular";
    case ErrorCode::budget_exceeded: return "BudgetExceeded";
    case ErrorCode::ambiguous_canonical: return "AmbiguousCanonical";
    case ErrorCode::not_orbit_preserving: return "NotOrbitPreserving";
    case ErrorCode::ambiguous: return "Ambiguous";
    case ErrorCode::inconsistent: return "Inconsistent";
    case ErrorCode::step_too_large: return "StepTooLarge";
    case ErrorCode::seed_off_orbit: return "SeedOffOrbit";
    case ErrorCode::obstruction_found: return "ObstructionFound";
    case ErrorCode::no_consistent_image: return "NoConsistentImage";
    case ErrorCode::not_homomorphism: return "NotHomomorphism";
    case ErrorCode::singular_jacobian: return "SingularJacobian";
    case ErrorCode::no_group_element: return "NoGroupElement";
    case ErrorCode::no_factor: return "NoFactor";
    case ErrorCode::identification_incomplete: return "IdentificationIncomplete";
    case ErrorCode::empty_restriction: return "EmptyRestriction";
    case ErrorCode::out_of_chart: return "OutOfChart";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace orbi
