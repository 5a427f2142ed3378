#include "wavepin/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "wavepin/contour.hpp"
#include "wavepin/errors.hpp"
#include "wavepin/front1d.hpp"

namespace wavepin {

using nlohmann::json;

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"front-speed",  "pin1d",      "relax2d",
                                              "drift-ellipse", "reduced-ode", "fbp-closed",
                                              "fbp-attached", "cross-validate"};
  return names;
}

namespace {

// Strict reader over one JSON object: every key must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }

  void optional_number(const char* key, std::optional<double>& out) {
    if (const json* v = take(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      if (!v->is_number()) fail(key, "a number or null");
      out = v->get<double>();
    }
  }

  template <typename U>
  void count(const char* key, U& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<long long>() < 0)) {
        fail(key, "a non-negative integer");
      }
      out = v->get<U>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) fail(key, "an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }

  void point(const char* key, Vec2& out) {
    std::vector<double> xy{out.x, out.y};
    numbers(key, xy);
    if (xy.size() != 2) fail(key, "a pair [x, y]");
    out = {xy[0], xy[1]};
  }

  void number_map(const char* key, std::map<std::string, double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_object()) fail(key, "an object of numbers");
      out.clear();
      for (const auto& [k, x] : v->items()) {
        if (!x.is_number()) fail(key, "an object of numbers");
        out[k] = x.get<double>();
      }
    }
  }

  const json* object(const char* key) { return take(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "' in " + where_);
    }
  }

 private:
  const json* take(const char* key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError(where_ + "." + key + " must be " + what);
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

KineticsSpec parse_kinetics(const json& j) {
  KineticsSpec k;
  Reader r(j, "kinetics");
  r.string("form", k.form);
  r.number_map("params", k.params);
  r.finish();
  return k;
}

GeometrySpec parse_geometry(const json& j, const std::string& where) {
  GeometrySpec g;
  Reader r(j, where);
  r.string("kind", g.kind);
  r.numbers("params", g.params);
  r.number("h", g.h);
  r.finish();
  return g;
}

InterfaceSpec parse_interface(const json& j) {
  InterfaceSpec s;
  Reader r(j, "interface");
  r.string("shape", s.shape);
  r.point("center", s.center);
  r.number("radius", s.radius);
  r.number("a", s.a);
  r.number("b", s.b);
  r.number("s", s.s);
  r.number("position", s.position);
  r.number("R0", s.R0);
  r.numbers("R", s.R);
  r.count("nodes", s.nodes);
  r.finish();
  return s;
}

ReducedSpec parse_reduced(const json& j) {
  ReducedSpec s;
  Reader r(j, "reduced");
  r.count("N", s.N);
  r.number("l", s.l);
  r.number("w_slope", s.w_slope);
  r.number("R0_star", s.R0_star);
  r.finish();
  return s;
}

FbpSide parse_fbp(const json& j) {
  FbpSide s;
  Reader r(j, "fbp");
  r.number("dt", s.dt);
  r.count("nodes", s.nodes);
  if (const json* g = r.object("geometry")) s.geometry = parse_geometry(*g, "fbp.geometry");
  r.finish();
  return s;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void check_geometry(const GeometrySpec& g, const std::string& where) {
  static const std::map<std::string, std::size_t> arity{
      {"interval", 1}, {"circle", 1}, {"ellipse", 2}, {"rectangle", 4}};
  const auto it = arity.find(g.kind);
  require(it != arity.end(), where + ".kind '" + g.kind + "' is not one of interval, circle, ellipse, rectangle");
  require(g.params.size() == it->second,
          where + ".params needs " + std::to_string(it->second) + " values for " + g.kind);
  for (double p : g.params) require(std::isfinite(p), where + ".params must be finite");
  if (g.kind == "rectangle") {
    require(g.params[2] > g.params[0] && g.params[3] > g.params[1], where + ": rectangle corners out of order");
  } else {
    for (double p : g.params) require(p > 0.0, where + ".params must be positive");
  }
  require(g.h > 0.0, where + ".h must be positive");
}

bool is_pde(const std::string& s) {
  return s == "pin1d" || s == "relax2d" || s == "drift-ellipse" || s == "cross-validate";
}

void validate(const RunConfig& c) {
  const auto& names = scenario_names();
  require(std::find(names.begin(), names.end(), c.scenario) != names.end(),
          "scenario '" + c.scenario + "' is unknown");
  check_geometry(c.geometry, "geometry");
  require(c.eps > 0.0, "eps must be positive");
  require(c.D > 0.0, "D must be positive");
  require(c.t_end > 0.0, "t_end must be positive");
  require(c.dt >= 0.0, "dt must be non-negative");
  require(c.output_every > 0.0, "output_every must be positive");
  require(c.snapshot_every >= 0.0, "snapshot_every must be non-negative");
  require(c.noise >= 0.0, "noise must be non-negative");
  require(!c.M || std::isfinite(*c.M), "M must be finite");
  require(!c.v_init || std::isfinite(*c.v_init), "v_init must be finite");
  if (!is_pde(c.scenario) && c.scenario != "front-speed") {
    require(c.dt > 0.0, "dt must be positive for " + c.scenario);
  }
  const std::string& shape = c.interface.shape;
  const bool two_d = c.geometry.kind != "interval";
  auto shapes = [&](std::initializer_list<const char*> ok) {
    for (const char* s : ok) {
      if (shape == s) return;
    }
    std::string list;
    for (const char* s : ok) list += (list.empty() ? "" : ", ") + std::string(s);
    throw ConfigError("interface.shape '" + shape + "' is not valid for " + c.scenario + " (use " + list + ")");
  };
  if (c.scenario == "pin1d") {
    require(!two_d, "pin1d needs geometry.kind interval");
    shapes({"front"});
    require(c.interface.position > 0.0 && c.interface.position < c.geometry.params[0],
            "interface.position must lie inside the interval");
  } else if (c.scenario != "front-speed") {
    require(two_d, c.scenario + " needs a two-dimensional geometry");
  }
  if (c.scenario == "relax2d") shapes({"disk", "ellipse", "droplet"});
  if (c.scenario == "drift-ellipse") {
    require(c.geometry.kind == "ellipse" && c.geometry.params[0] != c.geometry.params[1],
            "drift-ellipse needs a non-circular ellipse");
    shapes({"droplet"});
  }
  if (c.scenario == "fbp-closed" || c.scenario == "cross-validate") shapes({"disk", "ellipse"});
  if (c.scenario == "fbp-attached") shapes({"arc"});
  if (shape == "disk" || shape == "droplet") require(c.interface.radius > 0.0, "interface.radius must be positive");
  if (shape == "ellipse") require(c.interface.a > 0.0 && c.interface.b > 0.0, "interface.a and b must be positive");
  if (c.scenario == "fbp-closed" || c.scenario == "fbp-attached") {
    require(c.interface.nodes >= 6, "interface.nodes must be at least 6");
  }
  if (c.scenario == "reduced-ode") {
    require(c.reduced.N >= 2, "reduced.N must be at least 2");
    require(c.reduced.l >= 0.0, "reduced.l must be non-negative");
    require(c.reduced.w_slope < 0.0, "reduced.w_slope must be negative");
    require(c.interface.R.size() <= c.reduced.N - 1, "interface.R has more modes than reduced.N allows");
  }
  if (c.scenario == "cross-validate") {
    require(c.fbp.dt > 0.0, "fbp.dt must be positive");
    require(c.fbp.nodes >= 6, "fbp.nodes must be at least 6");
    if (c.fbp.geometry) {
      check_geometry(*c.fbp.geometry, "fbp.geometry");
      require(*c.fbp.geometry == c.geometry, "fbp.geometry differs from the pde2d geometry");
    }
  }
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c;
  Reader r(j, "config");
  require(r.has("scenario"), "config.scenario is required");
  r.string("scenario", c.scenario);
  if (const json* k = r.object("kinetics")) c.kinetics = parse_kinetics(*k);
  if (const json* g = r.object("geometry")) c.geometry = parse_geometry(*g, "geometry");
  if (const json* i = r.object("interface")) c.interface = parse_interface(*i);
  if (const json* x = r.object("reduced")) c.reduced = parse_reduced(*x);
  if (const json* f = r.object("fbp")) c.fbp = parse_fbp(*f);
  r.number("eps", c.eps);
  r.number("D", c.D);
  r.optional_number("M", c.M);
  r.optional_number("v_init", c.v_init);
  r.number("t_end", c.t_end);
  r.number("dt", c.dt);
  r.number("output_every", c.output_every);
  r.number("snapshot_every", c.snapshot_every);
  r.number("noise", c.noise);
  r.count("seed", c.seed);
  r.string("output_dir", c.output_dir);
  r.numbers("v_values", c.v_values);
  r.finish();
  if (c.scenario == "front-speed" && c.v_values.empty()) c.v_values = {-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3};
  validate(c);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

namespace {

json geometry_json(const GeometrySpec& g) { return {{"kind", g.kind}, {"params", g.params}, {"h", g.h}}; }

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

json to_json(const RunConfig& c) {
  json fbp{{"dt", c.fbp.dt}, {"nodes", c.fbp.nodes}};
  if (c.fbp.geometry) fbp["geometry"] = geometry_json(*c.fbp.geometry);
  const InterfaceSpec& i = c.interface;
  return {{"scenario", c.scenario},
          {"kinetics", {{"form", c.kinetics.form}, {"params", c.kinetics.params}}},
          {"geometry", geometry_json(c.geometry)},
          {"interface",
           {{"shape", i.shape},
            {"center", {i.center.x, i.center.y}},
            {"radius", i.radius},
            {"a", i.a},
            {"b", i.b},
            {"s", i.s},
            {"position", i.position},
            {"R0", i.R0},
            {"R", i.R},
            {"nodes", i.nodes}}},
          {"reduced",
           {{"N", c.reduced.N}, {"l", c.reduced.l}, {"w_slope", c.reduced.w_slope}, {"R0_star", c.reduced.R0_star}}},
          {"fbp", fbp},
          {"eps", c.eps},
          {"D", c.D},
          {"M", optional_json(c.M)},
          {"v_init", optional_json(c.v_init)},
          {"t_end", c.t_end},
          {"dt", c.dt},
          {"output_every", c.output_every},
          {"snapshot_every", c.snapshot_every},
          {"noise", c.noise},
          {"seed", c.seed},
          {"output_dir", c.output_dir},
          {"v_values", c.v_values}};
}

Kinetics make_kinetics(const KineticsSpec& k) {
  Kinetics kin = Kinetics::from_params(k.form, k.params);
  if (!kin.is_bistable()) throw ConfigError("kinetics '" + k.form + "' has no bistable range");
  return kin;
}

std::shared_ptr<const DomainBoundary> make_boundary(const GeometrySpec& g) {
  const auto& p = g.params;
  if (g.kind == "circle") return std::make_shared<const DomainBoundary>(DomainBoundary::circle(p[0]));
  if (g.kind == "ellipse") return std::make_shared<const DomainBoundary>(DomainBoundary::ellipse(p[0], p[1]));
  if (g.kind == "rectangle") {
    return std::make_shared<const DomainBoundary>(DomainBoundary::rectangle(p[0], p[1], p[2], p[3]));
  }
  throw ConfigError("geometry '" + g.kind + "' has no two-dimensional boundary");
}

std::shared_ptr<const GridSpec> make_scenario_grid(const GeometrySpec& g) {
  if (g.kind == "interval") {
    const auto n = static_cast<std::size_t>(std::llround(g.params[0] / g.h));
    if (n < 4) throw ConfigError("interval needs at least 4 cells");
    return std::make_shared<const GridSpec>(interval_grid(g.params[0], n));
  }
  return std::make_shared<const GridSpec>(make_grid(make_boundary(g), g.h));
}

double initial_level(const RunConfig& c, const DomainBoundary* b, Vec2 x) {
  const InterfaceSpec& i = c.interface;
  if (i.shape == "front") return i.position - x.x;
  if (i.shape == "disk") return i.radius - (x - i.center).norm();
  if (i.shape == "ellipse") {
    const Vec2 d = x - i.center;
    const double rho = std::hypot(d.x / i.a, d.y / i.b);
    if (rho < 1e-12) return std::min(i.a, i.b);
    // first-order distance (1 - rho) / |grad rho|
    const double g = std::hypot(d.x / (i.a * i.a), d.y / (i.b * i.b)) / rho;
    return (1.0 - rho) / g;
  }
  if (i.shape == "droplet") {
    if (!b) throw ConfigError("droplet needs a domain boundary");
    return i.radius - (x - b->point(i.s * b->total_length())).norm();
  }
  throw ConfigError("interface.shape '" + i.shape + "' has no field form");
}

SimState initial_fields(const RunConfig& c, const Kinetics& k, std::shared_ptr<const GridSpec> grid) {
  const double v0 = c.v_init.value_or(find_vc(k).vc);
  if (!k.bistable_range().contains(v0)) throw ConfigError("v_init lies outside the bistable range");
  const EquilibriumBranches br = branch_roots(k, v0);
  const double mid = 0.5 * (br.u_plus + br.u_minus);
  const double half = 0.5 * br.jump();
  const double width = 2.0 * std::sqrt(2.0) * c.eps / br.jump();
  // shift so the profile crosses u_m, the diagnostic level, on the interface
  const double shift = width * std::atanh((br.u_mid - mid) / half);
  const DomainBoundary* b = grid->domain.get();
  std::vector<double> u(grid->size(), 0.0), v(grid->size(), 0.0);
  // bit-for-bit reproducible uniform noise: the top 53 bits of mt19937_64
  std::mt19937_64 rng(c.seed);
  for (std::size_t j = 0; j < grid->ny; ++j) {
    for (std::size_t i = 0; i < grid->nx; ++i) {
      const std::size_t q = grid->idx(i, j);
      if (!grid->mask[q]) continue;
      u[q] = mid + half * std::tanh((initial_level(c, b, grid->center(i, j)) + shift) / width);
      if (c.noise > 0.0) {
        const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        u[q] += c.noise * (2.0 * r - 1.0);
      }
      v[q] = v0;
    }
  }
  if (c.M) {
    const SimState probe = make_state(grid, c.eps, c.D, u, v);
    const double dv = (*c.M - total_mass(probe)) / grid->masked_measure();
    for (std::size_t q = 0; q < grid->size(); ++q) {
      if (grid->mask[q]) v[q] += dv;
    }
  }
  return make_state(std::move(grid), c.eps, c.D, std::move(u), std::move(v));
}

InterfaceCurve initial_curve(const RunConfig& c, const DomainBoundary& b, std::size_t nodes) {
  const InterfaceSpec& i = c.interface;
  if (i.shape == "disk") return circle_curve(i.center, i.radius, nodes);
  if (i.shape == "ellipse") return ellipse_curve(i.center, i.a, i.b, nodes);
  if (i.shape == "arc") return synthesize_arc(b, i.s * b.total_length(), c.eps, i.R0, i.R, nodes);
  throw ConfigError("interface.shape '" + i.shape + "' has no marker-curve form");
}

namespace {

double interpolate(const std::vector<FbpRow>& rows, double t, double FbpRow::*field) {
  if (rows.empty()) return NAN;
  if (t <= rows.front().t) return rows.front().*field;
  for (std::size_t n = 1; n < rows.size(); ++n) {
    if (t <= rows[n].t) {
      const double w = (t - rows[n - 1].t) / (rows[n].t - rows[n - 1].t);
      return (1.0 - w) * (rows[n - 1].*field) + w * (rows[n].*field);
    }
  }
  return rows.back().*field;
}

// NaN counts as an unbounded deviation
void track_max(double& m, double x) { m = std::isnan(x) ? INFINITY : std::max(m, x); }

}  // namespace

CrossReport cross_validate(const RunConfig& c, const std::function<void(const SimState&)>& on_snapshot) {
  if (c.fbp.geometry && !(*c.fbp.geometry == c.geometry)) {
    throw ConfigError("fbp.geometry differs from the pde2d geometry");
  }
  if (c.interface.shape != "disk" && c.interface.shape != "ellipse") {
    throw ConfigError("cross-validation needs a closed interface (disk or ellipse)");
  }
  const auto kin = std::make_shared<const Kinetics>(make_kinetics(c.kinetics));
  const auto boundary = make_boundary(c.geometry);
  const auto grid = std::make_shared<const GridSpec>(make_grid(boundary, c.geometry.h));
  CrossReport rep;

  const SimState init = initial_fields(c, *kin, grid);
  RunOptions o;
  o.t_end = c.t_end;
  o.dt = c.dt;
  o.output_every = c.output_every;
  o.snapshot_every = c.snapshot_every;
  rep.pde = run(*kin, init, o, on_snapshot);

  // The field's mean v carries the uniform first correction eps v1 with
  // c'(v_c) v1 = <kappa> = 2 pi / L on a closed curve; the leading-order
  // constraint leaves it out. The fbp therefore starts from v_init - eps v1
  // and v0 + eps v1 is what v_mean is compared with.
  const double vc = find_vc(*kin).vc;
  const auto speed = default_speed_table(*kin);
  rep.cprime_vc = speed->dc(vc);
  auto first_order = [&](double length) { return c.eps * 2.0 * M_PI / (length * rep.cprime_vc); };
  const double v_start = c.v_init.value_or(vc);
  const InterfaceCurve curve = initial_curve(c, *boundary, c.fbp.nodes);
  const MassConstraint mc{enclosed_area(curve, *boundary), boundary->area(), kin.get()};
  const double M = mc.F(v_start - first_order(curve_length(curve)));
  const FbpState st = make_fbp_state(curve, boundary, kin, speed, c.eps, M);
  rep.fbp = trajectory(st, c.t_end, c.fbp.dt, c.output_every);

  for (const Diagnostics& d : rep.pde.series) {
    const double a = interpolate(rep.fbp.rows, d.t, &FbpRow::area_plus);
    const double l = interpolate(rep.fbp.rows, d.t, &FbpRow::length);
    const double v = interpolate(rep.fbp.rows, d.t, &FbpRow::v0) + first_order(l);
    rep.t.push_back(d.t);
    rep.area_pde.push_back(d.area_plus);
    rep.area_fbp.push_back(a);
    rep.length_pde.push_back(d.length);
    rep.length_fbp.push_back(l);
    rep.v_mean.push_back(d.v_mean);
    rep.v0.push_back(v);
    track_max(rep.max_area_dev, std::abs(d.area_plus - a) / a);
    track_max(rep.max_length_dev, std::abs(d.length - l) / l);
    track_max(rep.max_v_dev, std::abs(d.v_mean - v));
  }
  return rep;
}

CsvTable cross_table(const CrossReport& r) {
  CsvTable t;
  t.header = {"t", "area_pde", "area_fbp", "length_pde", "length_fbp", "v_mean", "v0"};
  for (std::size_t n = 0; n < r.t.size(); ++n) {
    t.rows.push_back({r.t[n], r.area_pde[n], r.area_fbp[n], r.length_pde[n], r.length_fbp[n], r.v_mean[n], r.v0[n]});
  }
  return t;
}

namespace {

std::string numbered(const char* stem, std::size_t n, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, n, ext);
  return buf;
}

struct Outputs {
  fs::path dir;
  std::vector<std::string> files;

  fs::path add(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }
};

double max_mass_drift(const std::vector<Diagnostics>& series) {
  double m = 0.0;
  const double M0 = series.front().M;
  for (const auto& d : series) m = std::max(m, std::abs(d.M - M0) / std::max(std::abs(M0), 1e-300));
  return m;
}

std::function<void(const SimState&)> snapshot_writer(Outputs& out) {
  auto count = std::make_shared<std::size_t>(0);
  return [&out, count](const SimState& s) { write_snapshot(out.add(numbered("snap", (*count)++, ".wpf")), s); };
}

// stable equilibria of the drift flow: the curvature maxima of the boundary
std::vector<double> curvature_maxima(std::shared_ptr<const DomainBoundary> b) {
  const ReducedCoeffs rc = make_reduced_coeffs(std::move(b), 1.0);
  std::vector<double> tips;
  for (const Equilibrium& e : find_equilibria(rc, 2)) {
    if (e.K_ss < 0.0) tips.push_back(e.s);
  }
  return tips;
}

double distance_to(const DomainBoundary& b, const std::vector<double>& targets, double s) {
  double d = INFINITY;
  for (double t : targets) d = std::min(d, std::abs(b.param_diff(s, t)));
  return d;
}

json run_front_speed(const RunConfig& c, Outputs& out) {
  const Kinetics k = make_kinetics(c.kinetics);
  CsvTable t;
  t.meta = {{"kinetics", k.name()}};
  t.header = {"v", "c_shooting", "c_quadrature", "beta"};
  double two_way = 0.0, closed = 0.0;
  for (std::size_t n = 0; n < c.v_values.size(); ++n) {
    const double v = c.v_values[n];
    const FrontProfile p = solve_front(k, v);
    const double cq = speed_by_quadrature(p, k);
    t.rows.push_back({v, p.c, cq, beta(p, k)});
    two_way = std::max(two_way, std::abs(p.c - cq));
    if (k.form() == KineticsForm::CubicSymmetric) {
      closed = std::max(closed, std::abs(p.c + 3.0 * p.branches.u_mid / std::sqrt(2.0)));
    }
    CsvTable prof;
    prof.meta = {{"v0", std::to_string(v)}, {"c", std::to_string(p.c)}};
    prof.header = {"z", "U", "dU"};
    for (std::size_t i = 0; i < p.z.size(); ++i) prof.rows.push_back({p.z[i], p.U[i], p.dU[i]});
    write_csv(out.add(numbered("profile", n, ".csv")), prof);
  }
  write_csv(out.add("front_speed.csv"), t);
  json s{{"max_shooting_vs_quadrature", two_way}, {"count", c.v_values.size()}};
  if (k.form() == KineticsForm::CubicSymmetric) s["max_shooting_vs_closed_form"] = closed;
  return s;
}

json run_pin1d(const RunConfig& c, Outputs& out) {
  const Kinetics k = make_kinetics(c.kinetics);
  const auto grid = make_scenario_grid(c.geometry);
  const SimState init = initial_fields(c, k, grid);
  RunOptions o;
  o.t_end = c.t_end;
  o.dt = c.dt;
  o.output_every = c.output_every;
  o.snapshot_every = c.snapshot_every;
  const RunResult r = run(k, init, o, snapshot_writer(out));
  CsvTable t = diagnostics_table(r.series);
  t.meta = {{"scenario", c.scenario}};
  write_csv(out.add("series.csv"), t);

  // sharp-interface steady state: u_+ x + u_- (L - x) + v_c L = M
  const double L = c.geometry.params[0];
  const double vc = find_vc(k).vc;
  const EquilibriumBranches br = branch_roots(k, vc);
  const double x_pred = (init.M - br.u_minus * L - vc * L) / br.jump();
  const Diagnostics& last = r.series.back();
  const auto xs = std::isfinite(last.level) ? level_crossings_1d(r.final_state.u, last.level, *grid)
                                            : std::vector<double>{};
  return {{"M", init.M},
          {"x_front", xs.size() == 1 ? json(xs[0]) : json(nullptr)},
          {"crossings", xs.size()},
          {"x_predicted", x_pred},
          {"v_mean", last.v_mean},
          {"v_c", vc},
          {"max_mass_drift", max_mass_drift(r.series)},
          {"range_events", r.range_events},
          {"steps", r.steps},
          {"dt", r.dt}};
}

json run_relax2d(const RunConfig& c, Outputs& out) {
  const Kinetics k = make_kinetics(c.kinetics);
  const auto grid = make_scenario_grid(c.geometry);
  const SimState init = initial_fields(c, k, grid);
  RunOptions o;
  o.t_end = c.t_end;
  o.dt = c.dt;
  o.output_every = c.output_every;
  o.snapshot_every = c.snapshot_every;
  const RunResult r = run(k, init, o, snapshot_writer(out));
  CsvTable t = diagnostics_table(r.series);
  t.meta = {{"scenario", c.scenario}};
  write_csv(out.add("series.csv"), t);
  const FieldContour fc = interface_contour(k, r.final_state);
  for (std::size_t n = 0; n < fc.curves.size(); ++n) {
    write_curve_csv(out.add(numbered("curve_final", n, ".csv")), fc.curves[n]);
  }
  const Diagnostics& first = r.series.front();
  const Diagnostics& last = r.series.back();
  json s{{"M", init.M},
         {"area_initial", first.area_plus},
         {"area_final", last.area_plus},
         {"length_final", last.length},
         {"curves_final", last.curves},
         {"v_mean_final", last.v_mean},
         {"max_mass_drift", max_mass_drift(r.series)},
         {"range_events", r.range_events},
         {"steps", r.steps},
         {"dt", r.dt}};
  if (c.scenario == "drift-ellipse") {
    const DomainBoundary& b = *grid->domain;
    const std::vector<double> tips = curvature_maxima(grid->domain);
    std::vector<double> dist;
    for (const auto& d : r.series) {
      if (std::isfinite(d.s_estimate)) dist.push_back(distance_to(b, tips, d.s_estimate));
    }
    std::size_t closer = 0;
    for (std::size_t n = 1; n < dist.size(); ++n) closer += dist[n] <= dist[n - 1] ? 1 : 0;
    s["s_initial"] = first.s_estimate;
    s["s_final"] = last.s_estimate;
    s["tip_distance_initial"] = dist.empty() ? json(nullptr) : json(dist.front());
    s["tip_distance_final"] = dist.empty() ? json(nullptr) : json(dist.back());
    s["approach_fraction"] = dist.size() > 1 ? json(static_cast<double>(closer) / static_cast<double>(dist.size() - 1))
                                             : json(nullptr);
  }
  return s;
}

json run_reduced(const RunConfig& c, Outputs& out) {
  const Kinetics k = make_kinetics(c.kinetics);
  const auto b = make_boundary(c.geometry);
  const double vc = find_vc(k).vc;
  const double cprime = default_speed_table(k)->dc(vc);
  const ReducedCoeffs rc = make_reduced_coeffs(b, cprime, c.reduced.w_slope, c.reduced.R0_star);
  ReducedState st = make_reduced_state(c.interface.s * b->total_length(), c.interface.R0, c.eps,
                                       c.reduced.N, c.reduced.l);
  std::copy(c.interface.R.begin(), c.interface.R.end(), st.R.begin());
  const ReducedTrajectory tr = integrate(st, rc, c.t_end, c.dt, c.output_every);
  CsvTable t = reduced_table(tr.samples);
  t.meta = {{"scenario", c.scenario}};
  write_csv(out.add("trajectory.csv"), t);

  std::vector<Equilibrium> eq;
  bool degenerate = false;
  try {
    eq = find_equilibria(rc, c.reduced.N);
  } catch (const DegenerateCritical&) {
    degenerate = true;
  }
  write_json(out.add("equilibria.json"), equilibria_json(eq));
  const ReducedState& last = tr.samples.back();
  json s{{"s_final", last.s},
         {"R0_final", last.R0},
         {"cprime_vc", cprime},
         {"equilibria", eq.size()},
         {"degenerate", degenerate},
         {"steps", tr.steps}};
  if (!eq.empty()) {
    const Equilibrium* near = &eq.front();
    for (const auto& e : eq) {
      if (std::abs(b->param_diff(last.s, e.s)) < std::abs(b->param_diff(last.s, near->s))) near = &e;
    }
    s["nearest_equilibrium"] = {{"s", near->s}, {"stability", to_string(near->stability)}};
  }
  return s;
}

json run_fbp(const RunConfig& c, Outputs& out) {
  const auto kin = std::make_shared<const Kinetics>(make_kinetics(c.kinetics));
  const auto b = make_boundary(c.geometry);
  const InterfaceCurve curve = initial_curve(c, *b, c.interface.nodes);
  const auto speed = default_speed_table(*kin);
  const FbpState st = c.M ? make_fbp_state(curve, b, kin, speed, c.eps, *c.M)
                          : make_pinned_state(curve, b, kin, speed, c.eps);
  const std::size_t every =
      c.snapshot_every > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c.snapshot_every / c.output_every)))
          : 0;
  std::size_t calls = 0;
  const FbpTrajectory tr = trajectory(st, c.t_end, c.dt, c.output_every, {}, [&](const FbpState& s) {
    if (every && calls % every == 0) write_curve_csv(out.add(numbered("curve", calls, ".csv")), s.curve);
    ++calls;
  });
  write_curve_csv(out.add("curve_final.csv"), tr.final_state.curve);
  CsvTable t = fbp_table(tr.rows);
  t.meta = {{"scenario", c.scenario}, {"M", std::to_string(st.M)}};
  write_csv(out.add("fbp.csv"), t);

  const FbpRow& first = tr.rows.front();
  const FbpRow& last = tr.rows.back();
  double drift = 0.0;
  for (const auto& r : tr.rows) drift = std::max(drift, std::abs(r.area_plus - first.area_plus) / first.area_plus);
  json s{{"M", st.M},
         {"area_initial", first.area_plus},
         {"area_final", last.area_plus},
         {"max_area_drift", drift},
         {"length_final", last.length},
         {"isoperimetric_final", last.iso_ratio},
         {"v0_final", last.v0},
         {"nodes_final", tr.final_state.curve.size()},
         {"monotonicity_violations", tr.monotonicity_violations},
         {"steps", tr.steps}};
  if (c.scenario == "fbp-attached") {
    const std::vector<double> tips = curvature_maxima(b);
    // measured ds/dt against (4 eps^2 / 3 pi) K_s at the interval midpoint
    std::vector<double> ratios;
    for (std::size_t n = 1; n < tr.rows.size(); ++n) {
      const double ds = b->param_diff(tr.rows[n - 1].s_estimate, tr.rows[n].s_estimate);
      const double sm = b->wrap(tr.rows[n - 1].s_estimate + 0.5 * ds);
      const double pred = 4.0 * c.eps * c.eps / (3.0 * M_PI) * b->curvature(sm).K_s;
      const double dt = tr.rows[n].t - tr.rows[n - 1].t;
      if (std::abs(pred) > 0.0 && dt > 0.0) ratios.push_back(ds / dt / pred);
    }
    std::sort(ratios.begin(), ratios.end());
    s["s_initial"] = first.s_estimate;
    s["s_final"] = last.s_estimate;
    s["tip_distance_initial"] = distance_to(*b, tips, first.s_estimate);
    s["tip_distance_final"] = distance_to(*b, tips, last.s_estimate);
    s["median_drift_ratio"] = ratios.empty() ? json(nullptr) : json(ratios[ratios.size() / 2]);
  }
  return s;
}

json run_cross(const RunConfig& c, Outputs& out) {
  const CrossReport r = cross_validate(c, snapshot_writer(out));
  CsvTable series = diagnostics_table(r.pde.series);
  series.meta = {{"scenario", c.scenario}};
  write_csv(out.add("series.csv"), series);
  write_csv(out.add("fbp.csv"), fbp_table(r.fbp.rows));
  write_csv(out.add("cross.csv"), cross_table(r));
  return {{"max_area_deviation", r.max_area_dev},
          {"max_length_deviation", r.max_length_dev},
          {"max_v_deviation", r.max_v_dev},
          {"pde_steps", r.pde.steps},
          {"pde_dt", r.pde.dt},
          {"fbp_steps", r.fbp.steps}};
}

}  // namespace

ScenarioOutput run_scenario(const RunConfig& c, const fs::path& dir) {
  validate(c);
  fs::create_directories(dir);
  Outputs out{dir, {}};
  json summary;
  if (c.scenario == "front-speed") {
    summary = run_front_speed(c, out);
  } else if (c.scenario == "pin1d") {
    summary = run_pin1d(c, out);
  } else if (c.scenario == "relax2d" || c.scenario == "drift-ellipse") {
    summary = run_relax2d(c, out);
  } else if (c.scenario == "reduced-ode") {
    summary = run_reduced(c, out);
  } else if (c.scenario == "fbp-closed" || c.scenario == "fbp-attached") {
    summary = run_fbp(c, out);
  } else {
    summary = run_cross(c, out);
  }
  return {std::move(summary), std::move(out.files)};
}

Manifest execute(const RunConfig& c, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioOutput o = run_scenario(c, dir);
  Manifest m;
  m.scenario = c.scenario;
  m.config = to_json(c);
  m.config["output_dir"] = dir.string();
  m.summary = std::move(o.summary);
  m.files = std::move(o.files);
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir / "manifest.json", m);
  return m;
}

}  // namespace wavepin
