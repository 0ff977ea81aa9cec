#include "orbi/counterexamples.hpp"

#include <cmath>
#include <numbers>
#include <regex>

#include "orbi/error.hpp"
#include "orbi/linalg.hpp"

namespace orbi {

namespace {

constexpr double kPi = std::numbers::pi;

// Bad-union annulus and disk cover.
constexpr double kAnnulusInner = 0.4;
constexpr double kAnnulusOuter = 0.6;
constexpr int kDisks = 8;
constexpr double kDiskRadius = 0.25;

// Football: north cone radius, south cone radius 1/kBandInner; the band
// kBandInner < |w| < kBandOuter is covered by kSectors sectors.
constexpr double kBandInner = 0.8;
constexpr double kBandOuter = 1.2;
constexpr int kSectors = 6;
constexpr double kSectorHalfWidth = 0.6 * 2 * kPi / kSectors;

Expr x() { return Expr::coord(0); }
Expr y() { return Expr::coord(1); }
Expr theta() { return atan2(y(), x()); }

Expr eq(Expr a, Expr b) { return Expr::binary(Expr::Op::eq, std::move(a), std::move(b)); }

/// (r cos(k t), r sin(k t)).
MapExpr angle_power(int k) {
  if (k == 1) return MapExpr::identity(2);
  Expr r = Expr::radius();
  Expr t = Expr(static_cast<double>(k)) * theta();
  return MapExpr(2, {r * cos(t), r * sin(t)});
}

/// (r cos(t/k), r sin(t/k)) with t in (-pi, pi].
MapExpr angle_root(int k) {
  if (k == 1) return MapExpr::identity(2);
  Expr r = Expr::radius();
  Expr t = theta() / Expr(static_cast<double>(k));
  return MapExpr(2, {r * cos(t), r * sin(t)});
}

/// Complex inversion w -> 1/w.
MapExpr inversion() {
  Expr q = x() * x() + y() * y();
  return MapExpr(2, {x() / q, -y() / q});
}

Matrix exact_identity() { return Matrix::identity(2); }

Transition identity_transition(const std::string& from, const std::string& to, const Region& domain) {
  return {from, to, domain, exact_identity(), Eigen::VectorXd::Zero(2)};
}

Region annulus_m() { return Region::annulus(2, kAnnulusInner, kAnnulusOuter); }

Region disk(int k) {
  Eigen::VectorXd c(2);
  c << 0.5 * std::cos(2 * kPi * k / kDisks), 0.5 * std::sin(2 * kPi * k / kDisks);
  return Region::ball(c, kDiskRadius);
}

std::string disk_id(int k) { return "U" + std::to_string(((k % kDisks) + kDisks) % kDisks); }
std::string lens_id(int k) { return "L" + std::to_string(((k % kDisks) + kDisks) % kDisks); }

enum class BadUnionKind { f, fprime, fsecond };

BadUnionKind kind_of(const Atlas& a) {
  if (a.name() == "bad-union-F") return BadUnionKind::f;
  if (a.name() == "bad-union-Fprime") return BadUnionKind::fprime;
  if (a.name() == "bad-union-Fsecond") return BadUnionKind::fsecond;
  throw Error(ErrorCode::invalid_argument, "not a bad-union family: " + a.name());
}

MapExpr radial_halfangle() {
  Expr r = Expr::radius();
  Expr t = theta() / Expr(2.0);
  return MapExpr(2, {r * cos(t), r * sin(t)});
}

MapExpr doubling() {
  Expr r = Expr::radius();
  return MapExpr(2, {(x() * x() - y() * y()) / r, Expr(2.0) * x() * y() / r});
}

/// Chart coordinates to the annulus coordinates of F, and back.
MapExpr to_annulus(BadUnionKind k) { return k == BadUnionKind::fprime ? doubling() : MapExpr::identity(2); }
MapExpr from_annulus(BadUnionKind k) { return k == BadUnionKind::fprime ? radial_halfangle() : MapExpr::identity(2); }

int parse_int(const std::string& text, const std::string& name) {
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used == text.size() && v >= 1 && v <= 64) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::parse_error, name + ": bad order '" + text + "'");
}

}  // namespace

int SignSequence::operator[](std::size_t n) const {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "sign sequences start at index 1");
  return n <= signs.size() ? signs[n - 1] : 1;
}

MapExpr bump(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "bump index must be >= 1");
  return MapExpr(1, {Expr::bump(n, x())});
}

MapExpr example1_map(const SignSequence& eps) {
  for (int s : eps.signs) {
    if (s != 1 && s != -1) throw Error(ErrorCode::invalid_argument, "signs must be +1 or -1");
  }
  Expr body = 0.0;
  for (int n = kBumpTerms; n >= 1; --n) {
    Expr term = Expr(static_cast<double>(eps[static_cast<std::size_t>(n)])) * exp(-(Expr(1.0) / x())) * Expr::bump(n, x());
    body = Expr::ite(x() > Expr(1.0 / (n + 1)), term, body);
  }
  return MapExpr(1, {Expr::ite((x() <= Expr(0.0)) || (x() > Expr(1.0)), 0.0, body)});
}

MapExpr example2_map() {
  Expr r = Expr::radius();
  Expr bx = 0.0;
  Expr by = 0.0;
  for (int n = kBumpTerms; n >= 1; --n) {
    Expr scale = exp(-r) * Expr::bump(n, r);
    Expr cond = r > Expr(1.0 / (n + 1));
    if (n % 2 == 0) {
      bx = Expr::ite(cond, scale * r, bx);
      by = Expr::ite(cond, 0.0, by);
    } else {
      bx = Expr::ite(cond, scale * x(), bx);
      by = Expr::ite(cond, scale * y(), by);
    }
  }
  Expr outside = (r > Expr(1.0)) || eq(r, 0.0);
  return MapExpr(2, {Expr::ite(outside, 0.0, bx), Expr::ite(outside, 0.0, by)});
}

MapExpr default_halfangle_profile() { return MapExpr(1, {Expr::bump(1, x()) * x()}); }

MapExpr halfangle_expr(const MapExpr& g) {
  if (g.in_dim() != 1 || g.out_dim() != 1) throw Error(ErrorCode::dim_mismatch, "profile must be R -> R");
  Expr gr = substitute(g.components().front(), {Expr::radius()});
  Expr t = theta() / Expr(2.0);
  return MapExpr(2, {gr * cos(t), gr * sin(t)});
}

QuotientMap halfangle_map(const MapExpr& g, Region source_region) {
  MapExpr h = halfangle_expr(g);
  return QuotientMap(LinearQuotient(trivial_group(2)), std::move(source_region), LinearQuotient(sign_group(2)),
                     [h](const Eigen::VectorXd& p) { return h(p); });
}

QuotientMap halfangle_map(const MapExpr& g) { return halfangle_map(g, Region::ball(Eigen::VectorXd::Zero(2), 1.25)); }

FiniteMatrixGroup sign_group(std::size_t dim) {
  return close_generators({Scalar(-1) * Matrix::identity(dim)});
}

FiniteMatrixGroup rotation_group(int m) {
  if (m < 1) throw Error(ErrorCode::invalid_argument, "rotation order must be >= 1");
  if (m == 1) return trivial_group(2);
  if (m == 2) return sign_group(2);
  if (m == 4) return close_generators({Matrix::from_rows({{0, -1}, {1, 0}})});
  const double a = 2 * kPi / m;
  Matrix r(2, 2,
           {Scalar::real(std::cos(a)), Scalar::real(-std::sin(a)), Scalar::real(std::sin(a)), Scalar::real(std::cos(a))});
  return close_generators({r});
}

FiniteMatrixGroup dihedral4() {
  return close_generators({Matrix::from_rows({{-1, 0}, {0, 1}}), Matrix::from_rows({{1, 0}, {0, -1}})});
}

FiniteMatrixGroup mirror_group() { return close_generators({Matrix::from_rows({{1, 0}, {0, -1}})}); }

FiniteMatrixGroup conjugate_group(const FiniteMatrixGroup& g, const Matrix& a) {
  if (g.is_trivial()) return trivial_group(g.dim());
  Matrix inv = inverse(a);
  std::vector<Matrix> gens;
  for (std::size_t k : g.generators()) gens.push_back(a * g.element(k) * inv);
  return close_generators(gens, kDefaultClosureCap, g.tolerance());
}

Atlas bad_union_f() {
  Atlas a("bad-union-F", 2);
  a.add_chart({"A", annulus_m(), trivial_group(2), "annulus", "", std::nullopt});
  return a;
}

Atlas bad_union_fprime() {
  Atlas a("bad-union-Fprime", 2);
  a.add_chart({"D", annulus_m(), sign_group(2), "annulus mod +-I", "", std::nullopt});
  return a;
}

Atlas bad_union_fsecond() {
  Atlas a("bad-union-Fsecond", 2);
  for (int k = 0; k < kDisks; ++k) {
    a.add_chart({disk_id(k), Region::intersection({disk(k), annulus_m()}), trivial_group(2), "disk", "", std::nullopt});
  }
  for (int k = 0; k < kDisks; ++k) {
    Region lens = Region::intersection({disk(k), disk(k + 1), annulus_m()});
    a.add_chart({lens_id(k), lens, trivial_group(2), "lens", "", std::nullopt});
  }
  for (int k = 0; k < kDisks; ++k) {
    Region lens = a.chart(lens_id(k)).model;
    a.add_transition(identity_transition(lens_id(k), disk_id(k), lens));
    a.add_transition(identity_transition(lens_id(k), disk_id(k + 1), lens));
  }
  return a;
}

LinkSet bad_union_cross(const Atlas& p, const Atlas& q) {
  const BadUnionKind kp = kind_of(p);
  const BadUnionKind kq = kind_of(q);
  MapExpr forward = kp == kq ? MapExpr::identity(2) : from_annulus(kq).compose(to_annulus(kp));
  MapExpr backward = kp == kq ? MapExpr::identity(2) : from_annulus(kp).compose(to_annulus(kq));
  LinkSet out;
  for (const auto& a : p.charts()) {
    for (const auto& b : q.charts()) {
      out.forward.push_back({a.id, b.id, forward, std::nullopt});
      out.backward.push_back({b.id, a.id, backward, std::nullopt});
    }
  }
  return out;
}

Atlas football(int p, int q) {
  Atlas a("football(" + std::to_string(p) + "," + std::to_string(q) + ")", 2);
  const bool tear = q == 1;
  const std::string north = tear ? "cone" : "north";
  const std::string south = tear ? "cap" : "south";
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  a.add_chart({north, Region::ball(zero, kBandOuter), rotation_group(p), "cone of order " + std::to_string(p), "",
               std::nullopt});
  a.add_chart({south, Region::ball(zero, 1.0 / kBandInner), rotation_group(q),
               tear ? std::string("smooth cap") : "cone of order " + std::to_string(q), "", std::nullopt});
  for (int k = 0; k < kSectors; ++k) {
    const double c = 2 * kPi * k / kSectors;
    a.add_chart({"S" + std::to_string(k),
                 Region::sector(kBandInner, kBandOuter, c - kSectorHalfWidth, c + kSectorHalfWidth),
                 trivial_group(2), "band sector", "", std::nullopt});
  }
  for (int k = 0; k < kSectors; ++k) {
    const double c = 2 * kPi * k / kSectors;
    const double next = 2 * kPi * (k + 1) / kSectors;
    a.add_chart({"O" + std::to_string(k),
                 Region::sector(kBandInner, kBandOuter, next - kSectorHalfWidth, c + kSectorHalfWidth),
                 trivial_group(2), "sector overlap", "", std::nullopt});
  }
  // The band coordinate w is the north coordinate raised to the p-th power;
  // the south coordinate raised to the q-th power is 1/w.
  a.add_identification({north, south, angle_root(q).compose(inversion()).compose(angle_power(p)),
                        Region::annulus(2, kBandInner, std::numeric_limits<double>::infinity())});
  a.add_identification({south, north, angle_root(p).compose(inversion()).compose(angle_power(q)),
                        Region::annulus(2, 1.0 / kBandOuter, std::numeric_limits<double>::infinity())});
  for (int k = 0; k < kSectors; ++k) {
    const std::string s = "S" + std::to_string(k);
    a.add_identification({s, north, angle_root(p), std::nullopt});
    a.add_identification({north, s, angle_power(p), std::nullopt});
    a.add_identification({s, south, angle_root(q).compose(inversion()), std::nullopt});
    a.add_identification({south, s, inversion().compose(angle_power(q)), std::nullopt});
  }
  for (int k = 0; k < kSectors; ++k) {
    const std::string o = "O" + std::to_string(k);
    Region model = a.chart(o).model;
    a.add_transition(identity_transition(o, "S" + std::to_string(k), model));
    a.add_transition(identity_transition(o, "S" + std::to_string((k + 1) % kSectors), model));
  }
  return a;
}

Atlas teardrop(int p) {
  Atlas a = football(p, 1);
  a.set_name("teardrop(" + std::to_string(p) + ")");
  return a;
}

Atlas mirror() {
  Atlas a("mirror", 2);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  a.add_chart({"big", Region::ball(zero, 1.0), mirror_group(), "half-disk", "", std::nullopt});
  a.add_chart({"small", Region::ball(zero, 0.5), mirror_group(), "inner half-disk", "", std::nullopt});
  a.add_transition(identity_transition("small", "big", a.chart("small").model));
  return a;
}

std::vector<std::string> fixture_names() {
  return {"example1",          "example2",   "halfangle",    "bad-union-F", "bad-union-Fprime",
          "bad-union-Fsecond", "teardrop(p)", "football(p,q)", "mirror"};
}

bool is_atlas_fixture(const std::string& name) {
  try {
    atlas_fixture(name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Atlas atlas_fixture(const std::string& name) {
  static const std::regex tear(R"(teardrop\((\d+)\))");
  static const std::regex ball(R"(football\((\d+),(\d+)\))");
  std::smatch m;
  if (name == "bad-union-F") return bad_union_f();
  if (name == "bad-union-Fprime") return bad_union_fprime();
  if (name == "bad-union-Fsecond") return bad_union_fsecond();
  if (name == "mirror") return mirror();
  if (std::regex_match(name, m, tear)) return teardrop(parse_int(m[1], name));
  if (std::regex_match(name, m, ball)) return football(parse_int(m[1], name), parse_int(m[2], name));
  const std::string sep = "-union-";
  if (name.rfind("bad-union-", 0) == 0) {
    auto at = name.find(sep, std::string("bad-union-").size());
    if (at != std::string::npos) {
      const std::string left = name.substr(0, at);
      const std::string right = "bad-union-" + name.substr(at + sep.size());
      if (left != "bad-union-F" && left != "bad-union-Fprime" && left != "bad-union-Fsecond") {
        throw Error(ErrorCode::parse_error, "unknown fixture '" + name + "'");
      }
      Atlas p = atlas_fixture(left);
      Atlas q = atlas_fixture(right);
      Atlas u = union_atlas(p, q, bad_union_cross(p, q));
      u.set_name(name);
      return u;
    }
  }
  throw Error(ErrorCode::parse_error, "unknown fixture '" + name + "'");
}

std::vector<Selection> locality_cover(const std::string& name) {
  Atlas a = atlas_fixture(name);
  const double inf = std::numeric_limits<double>::infinity();
  // Two overlapping lunes, cut along rays through disk centers so that no
  // restricted piece is a thin sliver.
  const double lo[2] = {-kPi / 4, 3 * kPi / 4};
  const double hi[2] = {5 * kPi / 4, 9 * kPi / 4};
  // Preimage of the lune under angle multiplication by k (k >= 1), rotated
  // by `flip` (-1 reverses orientation).
  auto lune = [&](int s, int k, int flip) {
    std::vector<Region> parts;
    const double from = flip > 0 ? lo[s] : -hi[s];
    const double to = flip > 0 ? hi[s] : -lo[s];
    for (int j = 0; j < k; ++j) {
      parts.push_back(Region::sector(0, inf, (from + 2 * kPi * j) / k, (to + 2 * kPi * j) / k));
    }
    return parts.size() == 1 ? parts.front() : Region::finite_union(std::move(parts));
  };
  std::vector<Selection> out(2);
  if (name.rfind("bad-union", 0) == 0) {
    for (int s = 0; s < 2; ++s) {
      for (const auto& c : a.charts()) out[s].emplace(c.id, lune(s, c.id == "D" ? 2 : 1, 1));
    }
    return out;
  }
  if (name == "mirror") {
    for (int s = 0; s < 2; ++s) {
      Eigen::VectorXd c(2);
      c << (s == 0 ? -0.4 : 0.4), 0.0;
      for (const auto& ch : a.charts()) out[s].emplace(ch.id, Region::ball(c, 0.7));
    }
    return out;
  }
  std::smatch m;
  static const std::regex tear(R"(teardrop\((\d+)\))");
  static const std::regex ball(R"(football\((\d+),(\d+)\))");
  int p = 0;
  int q = 1;
  if (std::regex_match(name, m, tear)) {
    p = parse_int(m[1], name);
  } else if (std::regex_match(name, m, ball)) {
    p = parse_int(m[1], name);
    q = parse_int(m[2], name);
  }
  if (p > 0) {
    // Each lune runs from pole to pole; small disks around the cone points
    // keep both poles inside.
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    for (int s = 0; s < 2; ++s) {
      for (const auto& c : a.charts()) {
        if (c.id == "cone" || c.id == "north") {
          out[s].emplace(c.id, Region::finite_union({lune(s, p, 1), Region::ball(zero, 0.5)}));
        } else if (c.id == "cap" || c.id == "south") {
          out[s].emplace(c.id, Region::finite_union({lune(s, q, -1), Region::ball(zero, 0.5)}));
        } else {
          out[s].emplace(c.id, lune(s, 1, 1));
        }
      }
    }
    return out;
  }
  throw Error(ErrorCode::invalid_argument, "no cover for fixture '" + name + "'");
}

}  // namespace orbi
