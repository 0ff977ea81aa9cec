#include "orbi/atlas_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "orbi/error.hpp"

namespace orbi {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::parse_error, "field '" + field + "': " + why);
}

const json& member(const json& obj, const char* key, const std::string& field) {
  if (!obj.is_object()) fail(field, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(field + "." + key, "missing");
  return *it;
}

std::string text_of(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

std::size_t count_of(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) fail(field, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double real_of(const json& v, const std::string& field) {
  std::string s = text_of(v, field);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  return parse_scalar(s, ScalarMode::approx, field).to_double();
}

ScalarMode mode_of(const json& obj, const std::string& field) {
  auto it = obj.find("scalarMode");
  if (it == obj.end()) return ScalarMode::exact;
  std::string m = text_of(*it, field + ".scalarMode");
  if (m == "exact") return ScalarMode::exact;
  if (m == "approx") return ScalarMode::approx;
  fail(field + ".scalarMode", "expected \"exact\" or \"approx\" (got \"" + m + "\")");
}

std::string index_field(const std::string& field, std::size_t k) { return field + "[" + std::to_string(k) + "]"; }

Eigen::VectorXd real_vector(const json& v, std::size_t dim, const std::string& field) {
  if (!v.is_array() || v.size() != dim) fail(field, "expected " + std::to_string(dim) + " numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim));
  for (std::size_t k = 0; k < dim; ++k) out[static_cast<Eigen::Index>(k)] = real_of(v[k], index_field(field, k));
  return out;
}

/// Nested rows or a flat row-major list.
Matrix matrix_of(const json& v, std::size_t dim, ScalarMode mode, const std::string& field) {
  if (!v.is_array()) fail(field, "expected an array");
  std::vector<Scalar> entries;
  if (v.size() == dim && dim > 0 && v[0].is_array()) {
    for (std::size_t i = 0; i < dim; ++i) {
      const std::string row = index_field(field, i);
      if (!v[i].is_array() || v[i].size() != dim) fail(row, "expected " + std::to_string(dim) + " entries");
      for (std::size_t j = 0; j < dim; ++j) {
        entries.push_back(parse_scalar(text_of(v[i][j], index_field(row, j)), mode, index_field(row, j)));
      }
    }
  } else if (v.size() == dim * dim) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      entries.push_back(parse_scalar(text_of(v[k], index_field(field, k)), mode, index_field(field, k)));
    }
  } else {
    fail(field, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  return Matrix(dim, dim, std::move(entries));
}

Region region_of(const json& v, std::size_t dim, const std::string& field) {
  const std::string kind = text_of(member(v, "kind", field), field + ".kind");
  try {
    if (kind == "full") return Region::full_space(dim);
    if (kind == "ball") {
      Eigen::VectorXd c = real_vector(member(v, "center", field), dim, field + ".center");
      double r = real_of(member(v, "radius", field), field + ".radius");
      if (auto g = v.find("gram"); g != v.end()) {
        return Region::gamma_ball(c, r, matrix_of(*g, dim, ScalarMode::approx, field + ".gram").to_real());
      }
      return Region::ball(c, r);
    }
    if (kind == "annulus") {
      return Region::annulus(dim, real_of(member(v, "inner", field), field + ".inner"),
                             real_of(member(v, "outer", field), field + ".outer"));
    }
    if (kind == "sector") {
      if (dim != 2) fail(field, "sectors are planar");
      return Region::sector(real_of(member(v, "inner", field), field + ".inner"),
                            real_of(member(v, "outer", field), field + ".outer"),
                            real_of(member(v, "from", field), field + ".from"),
                            real_of(member(v, "to", field), field + ".to"));
    }
    if (kind == "union" || kind == "intersection") {
      const json& ps = member(v, "parts", field);
      if (!ps.is_array() || ps.empty()) fail(field + ".parts", "expected a non-empty array");
      std::vector<Region> parts;
      for (std::size_t k = 0; k < ps.size(); ++k) parts.push_back(region_of(ps[k], dim, index_field(field + ".parts", k)));
      return kind == "union" ? Region::finite_union(std::move(parts)) : Region::intersection(std::move(parts));
    }
    if (kind == "affine") {
      Region base = region_of(member(v, "base", field), dim, field + ".base");
      Matrix a = matrix_of(member(v, "linear", field), dim, ScalarMode::approx, field + ".linear");
      return Region::affine_image(base, a.to_real(), real_vector(member(v, "offset", field), dim, field + ".offset"));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) throw;
    fail(field, e.what());
  }
  fail(field + ".kind", "unknown region kind \"" + kind + "\"");
}

FiniteMatrixGroup group_of(const json& v, std::size_t dim, const std::string& field) {
  const ScalarMode mode = mode_of(v, field);
  const json& gens = member(v, "generators", field);
  if (!gens.is_array()) fail(field + ".generators", "expected an array");
  std::vector<Matrix> ms;
  for (std::size_t k = 0; k < gens.size(); ++k) ms.push_back(matrix_of(gens[k], dim, mode, index_field(field + ".generators", k)));
  if (ms.empty()) return trivial_group(dim);
  return close_generators(ms);
}

std::string number(double v) {
  if (std::isinf(v)) return "inf";
  return Scalar::real(v).to_string();
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(number(v[k]));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).to_string());
    out.push_back(row);
  }
  return out;
}

json real_matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    out.push_back(row);
  }
  return out;
}

json region_json(const Region& r) {
  json out;
  switch (r.kind()) {
    case Region::Kind::full_space: out["kind"] = "full"; break;
    case Region::Kind::ball:
      out["kind"] = "ball";
      out["center"] = vector_json(r.center());
      out["radius"] = number(r.radius());
      if (r.uses_gram()) out["gram"] = real_matrix_json(r.gram());
      break;
    case Region::Kind::annulus:
      out["kind"] = "annulus";
      out["inner"] = number(r.inner());
      out["outer"] = number(r.outer());
      break;
    case Region::Kind::sector:
      out["kind"] = "sector";
      out["inner"] = number(r.inner());
      out["outer"] = number(r.outer());
      out["from"] = number(r.from_angle());
      out["to"] = number(r.to_angle());
      break;
    case Region::Kind::finite_union:
    case Region::Kind::intersection: {
      out["kind"] = r.kind() == Region::Kind::finite_union ? "union" : "intersection";
      json parts = json::array();
      for (const auto& p : r.parts()) parts.push_back(region_json(p));
      out["parts"] = parts;
      break;
    }
    case Region::Kind::affine_image:
      out["kind"] = "affine";
      out["base"] = region_json(r.parts().front());
      out["linear"] = real_matrix_json(r.linear());
      out["offset"] = vector_json(r.offset());
      break;
    case Region::Kind::component:
    case Region::Kind::predicate:
      throw Error(ErrorCode::invalid_argument, "region " + r.describe() + " has no file form");
  }
  return out;
}

json group_json(const FiniteMatrixGroup& g) {
  json out;
  out["scalarMode"] = g.mode() == ScalarMode::exact ? "exact" : "approx";
  json gens = json::array();
  for (std::size_t k : g.generators()) gens.push_back(matrix_json(g.element(k)));
  out["generators"] = gens;
  return out;
}

}  // namespace

Atlas parse_atlas_text(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, source + ": " + e.what());
  }
  if (!doc.is_object()) fail("(root)", "expected an object");
  std::string name = source;
  if (auto it = doc.find("name"); it != doc.end()) name = text_of(*it, "name");
  AtlasMode mode = AtlasMode::satake;
  if (auto it = doc.find("mode"); it != doc.end()) mode = parse_mode(text_of(*it, "mode"));

  const json& charts = member(doc, "charts", "(root)");
  if (!charts.is_array() || charts.empty()) fail("charts", "expected a non-empty array");
  std::size_t dim = 0;
  if (auto it = doc.find("dim"); it != doc.end()) dim = count_of(*it, "dim");
  if (dim == 0) dim = count_of(member(charts[0], "dim", "charts[0]"), "charts[0].dim");
  if (dim == 0) fail("dim", "must be >= 1");

  Atlas atlas(name, dim, mode);
  for (std::size_t k = 0; k < charts.size(); ++k) {
    const std::string f = index_field("charts", k);
    const json& c = charts[k];
    if (auto it = c.find("dim"); it != c.end() && count_of(*it, f + ".dim") != dim) {
      fail(f + ".dim", "does not match the atlas dimension " + std::to_string(dim));
    }
    Chart chart{text_of(member(c, "id", f), f + ".id"),
                region_of(member(c, "region", f), dim, f + ".region"),
                group_of(member(c, "group", f), dim, f + ".group"),
                c.contains("name") ? text_of(c["name"], f + ".name") : std::string(),
                c.contains("parent") ? text_of(c["parent"], f + ".parent") : std::string(),
                std::nullopt};
    if (auto it = c.find("ambient"); it != c.end()) chart.ambient = group_of(*it, dim, f + ".ambient");
    try {
      atlas.add_chart(std::move(chart));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::invalid_argument) throw;
      fail(f, e.what());
    }
  }

  if (auto it = doc.find("transitions"); it != doc.end()) {
    if (!it->is_array()) fail("transitions", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string f = index_field("transitions", k);
      const json& t = (*it)[k];
      const ScalarMode m = mode_of(t, f);
      Eigen::VectorXd offset = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
      if (t.contains("offset")) offset = real_vector(t["offset"], dim, f + ".offset");
      Transition tr{text_of(member(t, "from", f), f + ".from"), text_of(member(t, "to", f), f + ".to"),
                    region_of(member(t, "domain", f), dim, f + ".domain"),
                    matrix_of(member(t, "linear", f), dim, m, f + ".linear"), offset};
      try {
        atlas.add_transition(std::move(tr));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::invalid_argument && e.code() != ErrorCode::singular) throw;
        fail(f, e.what());
      }
    }
  }

  if (auto it = doc.find("identifications"); it != doc.end()) {
    if (!it->is_array()) fail("identifications", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string f = index_field("identifications", k);
      const json& r = (*it)[k];
      const json& comps = member(r, "map", f);
      if (!comps.is_array() || comps.size() != dim) fail(f + ".map", "expected " + std::to_string(dim) + " expressions");
      std::vector<std::string> parts;
      for (std::size_t c = 0; c < comps.size(); ++c) parts.push_back(text_of(comps[c], index_field(f + ".map", c)));
      Region map_domain = r.contains("mapDomain") ? region_of(r["mapDomain"], dim, f + ".mapDomain") : Region::full_space(dim);
      Identification id{text_of(member(r, "from", f), f + ".from"), text_of(member(r, "to", f), f + ".to"),
                        MapExpr::parse(dim, parts, map_domain, f + ".map"), std::nullopt};
      if (r.contains("domain")) id.domain = region_of(r["domain"], dim, f + ".domain");
      try {
        atlas.add_identification(std::move(id));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::invalid_argument) throw;
        fail(f, e.what());
      }
    }
  }
  return atlas;
}

Atlas parse_atlas(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_atlas_text(buf.str(), path);
}

std::string serialize_atlas(const Atlas& atlas) {
  json doc;
  doc["name"] = atlas.name();
  doc["mode"] = to_string(atlas.mode());
  doc["dim"] = atlas.dim();
  json charts = json::array();
  for (const auto& c : atlas.charts()) {
    json j;
    j["id"] = c.id;
    j["dim"] = atlas.dim();
    if (!c.name.empty()) j["name"] = c.name;
    j["region"] = region_json(c.model);
    j["group"] = group_json(c.group);
    if (!c.parent.empty()) j["parent"] = c.parent;
    if (c.ambient) j["ambient"] = group_json(*c.ambient);
    charts.push_back(j);
  }
  doc["charts"] = charts;
  json transitions = json::array();
  for (const auto& t : atlas.transitions()) {
    json j;
    j["from"] = t.from;
    j["to"] = t.to;
    j["domain"] = region_json(t.domain);
    j["scalarMode"] = t.linear.is_exact() ? "exact" : "approx";
    j["linear"] = matrix_json(t.linear);
    j["offset"] = vector_json(t.offset);
    transitions.push_back(j);
  }
  doc["transitions"] = transitions;
  json ids = json::array();
  for (const auto& r : atlas.identifications()) {
    json j;
    j["from"] = r.from;
    j["to"] = r.to;
    j["map"] = r.map.to_strings();
    if (r.map.domain().kind() != Region::Kind::full_space) j["mapDomain"] = region_json(r.map.domain());
    if (r.domain) j["domain"] = region_json(*r.domain);
    ids.push_back(j);
  }
  doc["identifications"] = ids;
  return doc.dump(2) + "\n";
}

}  // namespace orbi
