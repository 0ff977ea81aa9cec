#include "orbi/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbi/atlas.hpp"
#include "orbi/atlas_io.hpp"
#include "orbi/counterexamples.hpp"
#include "orbi/error.hpp"
#include "orbi/group.hpp"
#include "orbi/lifting.hpp"

namespace orbi::cli {

void Report::add(std::string key, std::string value) { records_.emplace_back(std::move(key), std::move(value)); }

void Report::summary(std::string key, std::string value) { summary_.emplace_back(std::move(key), std::move(value)); }

void Report::write_text(std::ostream& out) const {
  for (const auto& [k, v] : records_) out << k << '=' << v << '\n';
  out << "[summary]\n";
  for (const auto& [k, v] : summary_) out << k << '=' << v << '\n';
}

void Report::write_json(std::ostream& out) const {
  nlohmann::ordered_json doc;
  doc["records"] = nlohmann::ordered_json::array();
  for (const auto& [k, v] : records_) doc["records"].push_back({k, v});
  doc["summary"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : summary_) doc["summary"][k] = v;
  out << doc.dump(2) << '\n';
}

namespace {

struct Flags {
  std::string verb;
  std::vector<std::string> inputs;
  std::string out;
  AtlasOptions atlas;
  std::optional<AtlasMode> mode;
  std::optional<std::string> point;
  std::optional<std::string> chart;
  std::optional<double> radius;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string point_text(const Eigen::VectorXd& x) {
  std::string s = "(";
  for (Eigen::Index k = 0; k < x.size(); ++k) s += (k ? "," : "") + fmt(x[k]);
  return s + ")";
}

Eigen::VectorXd parse_point(const std::string& text) {
  std::vector<double> xs;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    xs.push_back(parse_scalar(part, ScalarMode::approx, "--point").to_double());
  }
  if (xs.empty()) throw Error(ErrorCode::parse_error, "field '--point': expected comma-separated coordinates");
  return Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

bool looks_like_file(const std::string& input) {
  return input.ends_with(".json") || std::filesystem::exists(input);
}

Atlas load_atlas(const std::string& input, const Flags& flags) {
  Atlas a = looks_like_file(input) ? parse_atlas(input) : atlas_fixture(input);
  if (flags.mode) a.set_mode(*flags.mode);
  return a;
}

int status_of(bool good) { return good ? Status::ok : Status::violations; }

void add_violations(Report& r, const ValidationReport& rep, const std::string& prefix = "") {
  for (std::size_t k = 0; k < rep.violations.size(); ++k) {
    const auto& v = rep.violations[k];
    const std::string key = prefix + "violation." + std::to_string(k + 1);
    std::string subjects;
    for (const auto& s : v.subjects) subjects += (subjects.empty() ? "" : ",") + s;
    r.add(key + ".condition", v.condition);
    r.add(key + ".subjects", subjects);
    r.add(key + ".witness", v.witness);
  }
}

void add_options(Report& r, const Flags& f) {
  r.add("samples", std::to_string(f.atlas.samples));
  r.add("seed", std::to_string(f.atlas.seed));
  r.add("tolerance", fmt(f.atlas.tolerance));
  r.add("word_bound", std::to_string(f.atlas.word_bound));
  r.add("grid", std::to_string(f.atlas.grid));
}

int validate_one(Report& r, const Atlas& a, const Flags& f, const std::string& prefix) {
  r.add(prefix + "atlas", a.name());
  r.add(prefix + "mode", to_string(a.mode()));
  r.add(prefix + "charts", std::to_string(a.charts().size()));
  r.add(prefix + "transitions", std::to_string(a.transitions().size()));
  r.add(prefix + "identifications", std::to_string(a.identifications().size()));
  ValidationReport rep = validate(a, f.atlas);
  r.add(prefix + "valid", rep.ok() ? "true" : "false");
  r.add(prefix + "violations", std::to_string(rep.violations.size()));
  add_violations(r, rep, prefix);
  return status_of(rep.ok());
}

int cmd_validate(Report& r, const Flags& f) {
  if (f.inputs.empty()) throw Error(ErrorCode::parse_error, "validate needs an atlas file or fixture name");
  add_options(r, f);
  int status = Status::ok;
  std::size_t bad = 0;
  for (std::size_t k = 0; k < f.inputs.size(); ++k) {
    const std::string prefix = f.inputs.size() == 1 ? "" : "input." + std::to_string(k + 1) + ".";
    r.add(prefix + "input", f.inputs[k]);
    Atlas a = load_atlas(f.inputs[k], f);
    int s = validate_one(r, a, f, prefix);
    if (s != Status::ok) ++bad;
    status = std::max(status, s);
  }
  r.summary("inputs", std::to_string(f.inputs.size()));
  r.summary("invalid", std::to_string(bad));
  return status;
}

std::string group_kind(const FiniteMatrixGroup& g) {
  if (g.is_trivial()) return "trivial";
  for (std::size_t k = 0; k < g.order(); ++k) {
    if (g.element_order(k) == g.order()) return "cyclic of order " + std::to_string(g.order());
  }
  return "non-cyclic of order " + std::to_string(g.order());
}

void add_group(Report& r, const std::string& prefix, const FiniteMatrixGroup& g) {
  r.add(prefix + "order", std::to_string(g.order()));
  r.add(prefix + "kind", group_kind(g));
  r.add(prefix + "reflection_free", is_reflection_free(g) ? "true" : "false");
  for (std::size_t k = 0; k < g.order(); ++k) {
    r.add(prefix + "element." + std::to_string(k), matrix_label(g.real_element(k)));
  }
}

int cmd_structure_group(Report& r, const Flags& f) {
  if (f.inputs.size() != 1) throw Error(ErrorCode::parse_error, "structure-group needs one atlas");
  if (!f.point) throw Error(ErrorCode::parse_error, "structure-group needs --point");
  Atlas a = load_atlas(f.inputs[0], f);
  const std::string chart = f.chart.value_or(a.charts().front().id);
  if (!a.has_chart(chart)) throw Error(ErrorCode::parse_error, "field '--chart': no chart '" + chart + "'");
  Eigen::VectorXd u = parse_point(*f.point);
  r.add("atlas", a.name());
  r.add("chart", chart);
  r.add("point", point_text(u));
  FiniteMatrixGroup g = structure_group_at(a, chart, u);
  add_group(r, "group.", g);
  r.summary("order", std::to_string(g.order()));
  return Status::ok;
}

LinkSet links_for(const Atlas& p, const Atlas& q) {
  auto bad = [](const Atlas& a) {
    return a.name() == "bad-union-F" || a.name() == "bad-union-Fprime" || a.name() == "bad-union-Fsecond";
  };
  if (bad(p) && bad(q)) return bad_union_cross(p, q);
  LinkSet links;
  for (const auto& c : p.charts()) {
    if (!q.has_chart(c.id)) continue;
    links.forward.push_back({c.id, c.id, MapExpr::identity(p.dim()), std::nullopt});
    links.backward.push_back({c.id, c.id, MapExpr::identity(p.dim()), std::nullopt});
  }
  return links;
}

int cmd_compare(Report& r, const Flags& f) {
  if (f.inputs.size() != 2) throw Error(ErrorCode::parse_error, "compare needs two atlases");
  add_options(r, f);
  Atlas p = load_atlas(f.inputs[0], f);
  Atlas q = load_atlas(f.inputs[1], f);
  r.add("first", p.name());
  r.add("second", q.name());
  ValidationReport rep = compare_atlases(p, q, links_for(p, q), f.atlas);
  r.add("equivalent", rep.ok() ? "true" : "false");
  add_violations(r, rep);
  r.summary("equivalent", rep.ok() ? "true" : "false");
  return status_of(rep.ok());
}

struct MapFixture {
  std::shared_ptr<QuotientMap> map;
  double rho = 0.2;
  std::optional<MapExpr> initial;
};

MapFixture map_fixture(const std::string& name, std::optional<double> radius) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  if (name == "halfangle") {
    const double R = radius.value_or(1.25);
    MapFixture m;
    m.map = std::make_shared<QuotientMap>(halfangle_map(default_halfangle_profile(), Region::ball(zero, R)));
    m.rho = std::min(0.2, R / 5);
    return m;
  }
  if (name == "example2") {
    const double R = radius.value_or(0.25);
    FiniteMatrixGroup c4 = rotation_group(4);
    MapExpr f = example2_map();
    MapFixture m;
    m.map = std::make_shared<QuotientMap>(LinearQuotient(c4), Region::ball(zero, R), LinearQuotient(c4),
                                          [f](const Eigen::VectorXd& x) { return f(x); });
    m.rho = std::min(0.05, R / 5);
    m.initial = f;
    return m;
  }
  throw Error(ErrorCode::parse_error, "unknown map fixture '" + name + "' (expected halfangle or example2)");
}

LiftOptions lift_options(const Flags& f) {
  LiftOptions o;
  o.samples = f.atlas.samples;
  o.seed = f.atlas.seed;
  return o;
}

std::string homomorphism_label(const GroupHomomorphism& h) {
  if (h.is_trivial()) return "trivial";
  if (h.is_identity_map()) return "identity";
  std::string s = "[";
  for (std::size_t k = 0; k < h.image.size(); ++k) s += (k ? "," : "") + std::to_string(h.image[k]);
  return s + "]";
}

/// Induced homomorphisms of Example 2 on the annuli 1/(n+1) < r < 1/n
/// inside the ball of the given radius, outermost first.
std::vector<std::pair<int, std::string>> example2_annuli(double radius, std::size_t count, const LiftOptions& lo) {
  std::vector<std::pair<int, std::string>> out;
  FiniteMatrixGroup c4 = rotation_group(4);
  InducedOptions io;
  io.require_injective = false;
  io.lift = lo;
  int n = static_cast<int>(std::ceil(1.0 / radius - 1e-12));
  for (; out.size() < count; ++n) {
    Region annulus = Region::annulus(2, 1.0 / (n + 1), 1.0 / n);
    GroupHomomorphism h = induced_homomorphism(example2_map(), c4, c4, annulus, io);
    out.emplace_back(n, homomorphism_label(h));
  }
  return out;
}

int lift_report(Report& r, const std::string& name, const Flags& f, const std::string& prefix) {
  MapFixture m = map_fixture(name, f.radius);
  LiftReport rep = radial_lift_extension(*m.map, m.rho, m.initial, lift_options(f));
  r.add(prefix + "map", name);
  r.add(prefix + "radius", fmt(f.radius.value_or(name == "halfangle" ? 1.25 : 0.25)));
  r.add(prefix + "status", to_string(rep.status));
  r.add(prefix + "rounds", std::to_string(rep.rounds));
  if (rep.monodromy) r.add(prefix + "monodromy", matrix_label(m.map->target().group().real_element(*rep.monodromy)));
  if (rep.homomorphism) r.add(prefix + "homomorphism", homomorphism_label(*rep.homomorphism));
  if (rep.obstruction) r.add(prefix + "obstruction", *rep.obstruction);
  if (name == "example2" && rep.status == LiftStatus::non_liftable) {
    auto annuli = example2_annuli(f.radius.value_or(0.25), 2, lift_options(f));
    std::string line = "NonLiftable: annuli";
    for (std::size_t k = 0; k < annuli.size(); ++k) {
      line += (k ? ", n=" : " n=") + std::to_string(annuli[k].first) + " (" + annuli[k].second + ")";
    }
    r.add(prefix + "verdict", line);
  } else if (rep.status == LiftStatus::non_liftable) {
    r.add(prefix + "verdict", "NonLiftable: " + rep.obstruction.value_or(""));
  } else {
    r.add(prefix + "verdict", to_string(rep.status));
  }
  return rep.status == LiftStatus::lifted ? Status::ok : Status::violations;
}

int cmd_lift(Report& r, const Flags& f) {
  if (f.inputs.size() != 1) throw Error(ErrorCode::parse_error, "lift needs one map fixture");
  int s = lift_report(r, f.inputs[0], f, "");
  r.summary("status", s == Status::ok ? "lifted" : "not lifted");
  return s;
}

int monodromy_report(Report& r, const std::string& name, const Flags& f, const std::string& prefix) {
  MapFixture m = map_fixture(name, std::nullopt);
  const Eigen::VectorXd c = f.point ? parse_point(*f.point) : Eigen::VectorXd::Zero(2);
  if (c.size() != 2) throw Error(ErrorCode::parse_error, "field '--point': expected a planar point");
  const double radius = f.radius.value_or(name == "halfangle" ? 0.75 : 0.22);
  auto loop = circle_loop(c, radius, 64);
  Eigen::VectorXd seed = (*m.map)(loop.front());
  std::size_t g = monodromy(*m.map, loop, seed, lift_options(f));
  r.add(prefix + "map", name);
  r.add(prefix + "loop", "circle center " + point_text(c) + " radius " + fmt(radius));
  const std::string label = matrix_label(m.map->target().group().real_element(g));
  r.add(prefix + "monodromy", label);
  return g == 0 ? Status::ok : Status::violations;
}

int cmd_monodromy(Report& r, const Flags& f) {
  if (f.inputs.size() != 1) throw Error(ErrorCode::parse_error, "monodromy needs one map fixture");
  int s = monodromy_report(r, f.inputs[0], f, "");
  r.summary("trivial", s == Status::ok ? "true" : "false");
  return s;
}

int demo_example1(Report& r) {
  // Pairs differing in one sign at index 5..9; checked on (0, 1/5] at
  // one point per bump support.
  int status = Status::ok;
  SignSequence base{{1, -1, 1, 1, -1, 1, -1, -1, 1, 1, 1, -1}};
  for (int k = 0; k < 5; ++k) {
    SignSequence other = base;
    other.signs[static_cast<std::size_t>(4 + k)] *= -1;
    MapExpr fa = example1_map(base);
    MapExpr fb = example1_map(other);
    std::vector<int> sigmas;
    for (int sigma : {1, -1}) {
      bool holds = true;
      for (int n = 5; n <= 15 && holds; ++n) {
        Eigen::VectorXd t(1);
        t << 0.5 * (1.0 / (n + 1) + 1.0 / n);
        const double a = fa(t)[0];
        const double b = fb(t)[0];
        holds = std::abs(a - sigma * b) <= 1e-12 * std::max(std::abs(a), 1e-300);
      }
      if (holds) sigmas.push_back(sigma);
    }
    const std::string key = "example1.pair." + std::to_string(k + 1);
    r.add(key + ".flipped_index", std::to_string(5 + k));
    r.add(key + ".constant_sign", sigmas.empty() ? "none" : std::to_string(sigmas.front()));
    if (sigmas.empty()) status = Status::violations;
  }
  return status;
}

int demo_bad_union(Report& r, const Flags& f) {
  int status = Status::ok;
  for (const char* name : {"bad-union-F-union-Fprime", "bad-union-F-union-Fsecond", "bad-union-Fprime-union-Fsecond"}) {
    Flags g = f;
    g.mode.reset();
    status = std::max(status, validate_one(r, atlas_fixture(name), g, std::string(name) + "."));
  }
  Atlas p = bad_union_f();
  Atlas q = bad_union_fprime();
  bool eq = atlases_equivalent(p, q, bad_union_cross(p, q), f.atlas);
  r.add("bad-union-F~Fprime.equivalent", eq ? "true" : "false");
  return status;
}

int demo_structure(Report& r, const std::string& name, const Flags& f) {
  Atlas a = atlas_fixture(name);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  int status = Status::ok;
  for (const auto& c : a.charts()) {
    if (!c.model.contains(zero) || c.group.is_trivial()) continue;
    add_group(r, name + "." + c.id + ".origin.", structure_group_at(a, c.id, zero));
  }
  if (name == "mirror") {
    for (AtlasMode m : {AtlasMode::satake, AtlasMode::diffeological}) {
      a.set_mode(m);
      ValidationReport rep = validate(a, f.atlas);
      r.add(name + "." + to_string(m) + ".valid", rep.ok() ? "true" : "false");
      add_violations(r, rep, name + "." + to_string(m) + ".");
      if (!rep.ok()) status = Status::violations;
    }
  } else {
    status = validate_one(r, a, f, name + ".");
  }
  return status;
}

const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names = {"halfangle", "example1",    "example2", "bad-union",
                                                 "teardrop",  "football", "mirror"};
  return names;
}

int run_demo(Report& r, const std::string& name, const Flags& f) {
  if (name == "halfangle") {
    int a = monodromy_report(r, "halfangle", f, "halfangle.loop.");
    int b = lift_report(r, "halfangle", f, "halfangle.lift.");
    return std::max(a, b);
  }
  if (name == "example1") return demo_example1(r);
  if (name == "example2") return lift_report(r, "example2", f, "example2.");
  if (name == "bad-union") return demo_bad_union(r, f);
  if (name == "teardrop") return demo_structure(r, "teardrop(3)", f);
  if (name == "football") return demo_structure(r, "football(2,3)", f);
  if (name == "mirror") return demo_structure(r, "mirror", f);
  throw Error(ErrorCode::parse_error, "unknown demo '" + name + "'");
}

int cmd_demo(Report& r, const Flags& f) {
  if (f.inputs.empty()) throw Error(ErrorCode::parse_error, "demo needs a name or 'all'");
  std::vector<std::string> names;
  for (const auto& in : f.inputs) {
    if (in == "all") {
      names.insert(names.end(), demo_names().begin(), demo_names().end());
    } else {
      names.push_back(in);
    }
  }
  for (const auto& n : names) {
    if (std::find(demo_names().begin(), demo_names().end(), n) == demo_names().end()) {
      throw Error(ErrorCode::parse_error, "unknown demo '" + n + "'");
    }
  }
  add_options(r, f);
  int status = Status::ok;
  for (const auto& n : names) {
    int s = run_demo(r, n, f);
    r.summary(n, s == Status::ok ? "ok" : "reproduced obstruction");
    status = std::max(status, s);
  }
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orbifold atlas checks: V-manifold defining families, Haefliger atlases and lifting."};
  app.require_subcommand(1, 1);
  Flags f;
  std::string mode;
  auto common = [&](CLI::App* sub) {
    sub->add_option("inputs", f.inputs, "Atlas files or fixture names");
    sub->add_option("--out", f.out, "Also write the report as JSON to this path");
    sub->add_option("--samples", f.atlas.samples, "Samples per chart")->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.atlas.seed, "Sampling seed");
    sub->add_option("--tolerance", f.atlas.tolerance, "Numerical tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--word-bound", f.atlas.word_bound, "Relation word length bound")->check(CLI::PositiveNumber);
    sub->add_option("--grid", f.atlas.grid, "Grid resolution")->check(CLI::PositiveNumber);
    sub->add_option("--mode", mode, "satake | haefliger | diffeological");
    sub->add_option("--point", f.point, "Comma-separated coordinates");
    sub->add_option("--chart", f.chart, "Chart id");
    sub->add_option("--radius", f.radius, "Ball or loop radius")->check(CLI::PositiveNumber);
  };
  std::vector<std::pair<std::string, std::string>> verbs = {
      {"validate", "Validate atlases in their mode"},
      {"structure-group", "Structure group at a chart point"},
      {"compare", "Equivalence of two atlases through their union"},
      {"lift", "Radial lift extension of a map fixture"},
      {"monodromy", "Monodromy of a map fixture around a circle"},
      {"demo", "Named demonstrations, or 'all'"},
  };
  for (const auto& [name, help] : verbs) common(app.add_subcommand(name, help));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return Status::usage;
  }
  f.verb = app.get_subcommands().front()->get_name();

  Report r;
  r.add("command", f.verb);
  int status = Status::ok;
  try {
    if (!mode.empty()) f.mode = parse_mode(mode);
    if (f.verb == "validate") status = cmd_validate(r, f);
    if (f.verb == "structure-group") status = cmd_structure_group(r, f);
    if (f.verb == "compare") status = cmd_compare(r, f);
    if (f.verb == "lift") status = cmd_lift(r, f);
    if (f.verb == "monodromy") status = cmd_monodromy(r, f);
    if (f.verb == "demo") status = cmd_demo(r, f);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) {
      err << e.what() << '\n';
      return Status::usage;
    }
    r.add("error", e.what());
    status = Status::violations;
  }
  r.summary("status", std::to_string(status));
  r.write_text(out);
  if (!f.out.empty()) {
    std::ofstream file(f.out);
    if (!file) {
      err << "cannot write '" << f.out << "'\n";
      return Status::usage;
    }
    r.write_json(file);
  }
  return status;
}

}  // namespace orbi::cli
