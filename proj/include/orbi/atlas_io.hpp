#pragma once

#include <string>
#include <string_view>

#include "orbi/atlas.hpp"

namespace orbi {

/// JSON atlas files.
///
///   {"name": "...", "mode": "satake", "dim": 2,
///    "charts": [{"id": "A", "dim": 2, "name": "...",
///                "region": {"kind": "ball", "center": ["0","0"], "radius": "1"},
///                "group": {"scalarMode": "exact", "generators": [[["0","-1"],["1","0"]]]}}],
///    "transitions": [{"from": "A", "to": "B", "domain": {...}, "scalarMode": "exact",
///                     "linear": [["1","0"],["0","1"]], "offset": ["0","0"]}],
///    "identifications": [{"from": "A", "to": "B", "map": ["x/2", "y"], "domain": {...}}]}
///
/// Numbers are strings: "p", "p/q", decimals (approx mode only) and "inf"
/// for unbounded radii. A generator may also be a flat row-major list.
/// Region kinds: full, ball (optional "gram"), annulus, sector, union,
/// intersection, affine. Errors are ParseError naming the offending field,
/// or the errors of group closure (NotFinite, Singular).
Atlas parse_atlas_text(std::string_view text, const std::string& source = "atlas");
Atlas parse_atlas(const std::string& path);

/// Throws InvalidArgument for charts whose regions have no file form
/// (grid components, predicates).
std::string serialize_atlas(const Atlas& atlas);

}  // namespace orbi
