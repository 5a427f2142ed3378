// Acceptance suite for the primary criteria. Prints one PASS/FAIL line per
// criterion with its wall time and the measured numbers; exits non-zero if
// any criterion fails or overruns its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavepin/contour.hpp"
#include "wavepin/fbp.hpp"
#include "wavepin/front1d.hpp"
#include "wavepin/geometry.hpp"
#include "wavepin/kinetics.hpp"
#include "wavepin/pde2d.hpp"
#include "wavepin/reduced.hpp"
#include "wavepin/scenarios.hpp"

using namespace wavepin;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

// Roots of u^3 - u - v = 0 (the cubic's equilibria) by the trigonometric
// formula, ascending.
std::vector<double> cubic_roots(double v) {
  const double r = 2.0 / std::sqrt(3.0);
  const double phi = std::acos(std::clamp(v * 3.0 * std::sqrt(3.0) / 2.0, -1.0, 1.0));
  std::vector<double> u;
  for (int k = 0; k < 3; ++k) u.push_back(r * std::cos((phi - 2.0 * M_PI * k) / 3.0));
  std::sort(u.begin(), u.end());
  return u;
}

// v with c(v) = -3 u_m(v) / sqrt 2 equal to the requested speed
double v_for_speed(double c) {
  const double um = -c * std::sqrt(2.0) / 3.0;
  return um * um * um - um;
}

std::shared_ptr<const Kinetics> cubic() { return std::make_shared<const Kinetics>(Kinetics::cubic_symmetric()); }

std::shared_ptr<const DomainBoundary> ellipse_domain(double a, double b) {
  return std::make_shared<const DomainBoundary>(DomainBoundary::ellipse(a, b));
}

std::shared_ptr<const DomainBoundary> disk_domain(double r) {
  return std::make_shared<const DomainBoundary>(DomainBoundary::circle(r));
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "wavepin_acceptance" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// 1 ---------------------------------------------------------------------------
void front_speed(Outcome& o) {
  const Kinetics k = Kinetics::cubic_symmetric();
  double closed = 0.0, two_way = 0.0;
  for (double v : {0.0, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3}) {
    const FrontProfile p = solve_front(k, v);
    const double c_exact = -3.0 * cubic_roots(v)[1] / std::sqrt(2.0);
    closed = std::max(closed, std::abs(p.c - c_exact));
    two_way = std::max(two_way, std::abs(p.c - speed_by_quadrature(p, k)));
  }
  o.detail << "max|c - c_exact| = " << closed << ", max|c_shoot - c_quad| = " << two_way;
  o.require(closed <= 1e-6, "closed form");
  o.require(two_way <= 1e-6, "quadrature");
}

// 2 ---------------------------------------------------------------------------
void beta_oracle(Outcome& o) {
  const Kinetics k = Kinetics::cubic_symmetric();
  const double b = beta(solve_front(k, 0.0), k);
  const double err = std::abs(b + 3.0 / std::sqrt(2.0));
  o.detail << "beta(0) = " << b << ", error " << err;
  o.require(err <= 1e-6, "beta(0) = -3/sqrt 2");
}

// 3 ---------------------------------------------------------------------------
void mass_conservation(Outcome& o) {
  const Kinetics k = Kinetics::cubic_symmetric();
  const RunConfig c = parse_config(json{{"scenario", "relax2d"},
                                        {"geometry", {{"kind", "circle"}, {"params", {1.0}}, {"h", 2.0 / 256.0}}},
                                        {"interface", {{"shape", "ellipse"}, {"a", 0.6}, {"b", 0.35}}},
                                        {"eps", 0.05},
                                        {"v_init", 0.05},
                                        {"noise", 0.01},
                                        {"seed", 1}});
  const auto grid = make_scenario_grid(c.geometry);
  SimState s = initial_fields(c, k, grid);
  const Integrator integ(k, grid, c.eps, c.D, stable_dt(k, s));
  const double M0 = total_mass(s);
  double worst = 0.0;
  for (int n = 0; n < 10000; ++n) {
    integ.step(s);
    worst = std::max(worst, std::abs(total_mass(s) - M0) / std::abs(M0));
  }
  o.detail << "grid " << grid->nx << "x" << grid->ny << " (" << grid->count_inside()
           << " cells), 1e4 steps, max |dM|/|M0| = " << worst;
  o.require(worst <= 1e-12, "mass drift");
}

// 4 ---------------------------------------------------------------------------
void pinning_1d(Outcome& o) {
  for (double M : {-0.2, 0.0, 0.2}) {
    const RunConfig c = parse_config(json{{"scenario", "pin1d"},
                                          {"geometry", {{"kind", "interval"}, {"params", {1.0}}, {"h", 0.0025}}},
                                          {"interface", {{"shape", "front"}, {"position", 0.45}}},
                                          {"eps", 0.02},
                                          {"D", 1.0},
                                          {"M", M},
                                          {"t_end", 3.0},
                                          {"output_every", 0.1}});
    const Manifest m = execute(c, scratch("pin1d"));
    const double target = 0.5 * (M + 1.0);
    const json& x = m.summary["x_front"];
    const double xf = x.is_number() ? x.get<double>() : NAN;
    const double vbar = m.summary["v_mean"].get<double>();
    const double rel = std::abs(xf - target) / target;
    o.detail << "M=" << M << ": x_f=" << xf << " (rel " << rel << "), |v-vc|=" << std::abs(vbar) << "; ";
    o.require(rel <= 0.02, "front position for M=" + std::to_string(M));
    o.require(std::abs(vbar) <= 5e-3, "v_mean for M=" + std::to_string(M));
  }
}

// 5 ---------------------------------------------------------------------------
void curvature_flow(Outcome& o) {
  const auto k = cubic();
  const auto speed = default_speed_table(*k);
  const auto dom = disk_domain(3.0);
  const double eps = 0.05;
  const FbpState st = make_pinned_state(ellipse_curve({0, 0}, 1.0, 0.5, 256), dom, k, speed, eps);
  const double A0 = st.area_plus();
  double drift = 0.0;
  const FbpTrajectory tr = trajectory(st, 1.0 / eps, 0.01, 0.1, {}, [&](const FbpState& s) {
    drift = std::max(drift, std::abs(s.area_plus() - A0) / A0);
  });
  const double iso = tr.rows.back().iso_ratio;
  o.detail << "area drift " << drift << ", final L^2/(4 pi A) - 1 = " << iso - 1.0
           << ", monotonicity violations " << tr.monotonicity_violations << "; area-rate errors";
  o.require(drift <= 1e-4, "area drift");
  o.require(std::abs(iso - 1.0) <= 1e-3, "isoperimetric ratio");

  // identity dA/dt = c(v0) L away from pinning, under node refinement
  const MassConstraint mc0{enclosed_area(ellipse_curve({0, 0}, 1.0, 0.5, 256), *dom), dom->area(), k.get()};
  const double M = mc0.F(v_for_speed(0.1));
  double prev = INFINITY;
  for (std::size_t n : {32, 64, 128, 256}) {
    FbpState s = make_fbp_state(ellipse_curve({0, 0}, 1.0, 0.5, n), dom, k, speed, eps, M);
    // the first steps move angle-spaced nodes to equal arclength
    for (int i = 0; i < 20; ++i) s = evolve(s, 1e-3);
    const AreaRate r = area_rate_check(s, evolve(s, 1e-3));
    const double err = std::abs(r.lhs - r.rhs) / std::abs(r.rhs);
    o.detail << " n=" << n << ":" << err;
    o.require(err <= 0.5 * prev, "area-rate error halves at n=" + std::to_string(n));
    prev = err;
  }
}

// 6 ---------------------------------------------------------------------------
void drift_law(Outcome& o) {
  const auto k = cubic();
  const auto speed = default_speed_table(*k);
  const auto dom = ellipse_domain(2.0, 1.0);
  const double L = dom->total_length();
  const double eps = 0.05;
  const std::size_t nodes = 64;
  auto tip_distance = [&](double s) {
    return std::min(std::abs(dom->param_diff(s, 0.0)), std::abs(dom->param_diff(s, 0.5 * L)));
  };
  auto start = [&](double s0) {
    return make_pinned_state(synthesize_arc(*dom, s0, eps, 0.0, {}, nodes), dom, k, speed, eps);
  };

  // measured ds/dt against (4 eps^2 / 3 pi) K_s over the transient
  std::vector<double> ts, ss;
  const FbpTrajectory a = trajectory(start(L / 8.0), 200.0, 0.0025, 10.0, {}, [&](const FbpState& s) {
    ts.push_back(s.t);
    ss.push_back(attached_midpoint(s.curve, *dom));
  });
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t n = 1; n < ts.size(); ++n) {
    if (ts[n - 1] < 10.0) continue;
    const double ds = dom->param_diff(ss[n - 1], ss[n]);
    const double pred = 4.0 * eps * eps / (3.0 * M_PI) * dom->curvature(dom->wrap(ss[n - 1] + 0.5 * ds)).K_s;
    const double ratio = ds / (ts[n] - ts[n - 1]) / pred;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  o.detail << "ds/dt ratio over t in [10, 200]: [" << lo << ", " << hi << "]";
  o.require(lo >= 0.85 && hi <= 1.15, "drift within 15%");

  // carry on until the droplet sits at the major tip
  FbpState st = a.final_state;
  while (tip_distance(attached_midpoint(st.curve, *dom)) > 1e-3 && st.t < 2500.0) {
    st = trajectory(st, 100.0, 0.005, 100.0).final_state;
  }
  const double d_end = tip_distance(attached_midpoint(st.curve, *dom));
  o.detail << "; tip distance " << d_end << " at t = " << st.t;
  o.require(d_end <= 1e-3, "convergence to the tip");

  // perturbations: distance from the tip shrinks, distance from the co-vertex grows
  auto monotone = [&](double s0, double t_end, const std::function<double(double)>& dist, bool shrink,
                      double& first, double& last) {
    std::vector<double> d;
    trajectory(start(s0), t_end, 0.005, 10.0, {},
               [&](const FbpState& s) { d.push_back(dist(attached_midpoint(s.curve, *dom))); });
    bool ok = true;
    for (std::size_t n = 1; n < d.size(); ++n) ok = ok && (shrink ? d[n] < d[n - 1] : d[n] > d[n - 1]);
    first = d.front();
    last = d.back();
    return ok;
  };
  double f = 0, l = 0;
  const bool tip_ok = monotone(0.02 * L, 200.0, tip_distance, true, f, l);
  o.detail << "; tip perturbation " << f << " -> " << l;
  o.require(tip_ok && l < 0.1 * f, "tip perturbation decays");
  const bool cov_ok = monotone(
      0.27 * L, 500.0, [&](double s) { return std::abs(dom->param_diff(s, 0.25 * L)); }, false, f, l);
  o.detail << "; co-vertex perturbation " << f << " -> " << l;
  o.require(cov_ok && l > f, "co-vertex perturbation grows");
}

// 7 ---------------------------------------------------------------------------
void reduced_ode(Outcome& o) {
  const double a = 2.0, b = 1.0;
  const auto dom = ellipse_domain(a, b);
  const double L = dom->total_length();
  const ReducedCoeffs rc = make_reduced_coeffs(dom, 3.0 / std::sqrt(2.0));
  const auto eq = find_equilibria(rc, 8);
  o.detail << eq.size() << " equilibria;";
  o.require(eq.size() == 4, "exactly four equilibria");
  // closed forms at the tips and co-vertices
  const double kss_tip = -3.0 * a * (a * a - b * b) / std::pow(b, 6);
  const double kss_cov = 3.0 * b * (a * a - b * b) / std::pow(a, 6);
  const double where[4] = {0.0, 0.25 * L, 0.5 * L, 0.75 * L};
  for (std::size_t i = 0; i < eq.size() && i < 4; ++i) {
    const Equilibrium& e = eq[i];
    const bool tip = i % 2 == 0;
    o.detail << " s=" << e.s << " " << to_string(e.stability);
    o.require(std::abs(dom->param_diff(e.s, where[i])) < 1e-8, "location " + std::to_string(i));
    o.require(e.stability == (tip ? Stability::Stable : Stability::Unstable), "classification " + std::to_string(i));
    o.require(std::abs(e.K_ss - (tip ? kss_tip : kss_cov)) < 1e-6 * std::abs(kss_tip), "K_ss " + std::to_string(i));
    for (std::size_t n = 2; n <= 8; ++n) {
      o.require(e.eigenvalues.at(n) == -static_cast<double>(n * n - 1), "mode eigenvalue " + std::to_string(n));
    }
  }
  // basins: start on either side of each co-vertex
  std::size_t right = 0, total = 0;
  for (double frac : {0.05, 0.15, 0.24, 0.26, 0.35, 0.45, 0.55, 0.65, 0.74, 0.76, 0.85, 0.95}) {
    const double s0 = frac * L;
    const double target = (frac < 0.25 || frac > 0.75) ? 0.0 : 0.5 * L;
    const auto tr = integrate(make_reduced_state(s0, 0.3, 0.1, 8, 2.0), rc, 2.0e4, 0.2, 1.0e3);
    ++total;
    right += std::abs(dom->param_diff(tr.samples.back().s, target)) < 1e-6 ? 1 : 0;
  }
  o.detail << " basins " << right << "/" << total;
  o.require(right == total, "basins");
}

// 8 ---------------------------------------------------------------------------
void cross_validation(Outcome& o) {
  const RunConfig c = parse_config(json{{"scenario", "cross-validate"},
                                        {"geometry", {{"kind", "circle"}, {"params", {1.0}}, {"h", 0.01}}},
                                        {"interface", {{"shape", "disk"}, {"radius", 0.5}}},
                                        {"fbp", {{"dt", 0.01}, {"nodes", 64}}},
                                        {"eps", 0.05},
                                        {"v_init", 0.1},
                                        {"t_end", 20.0},
                                        {"output_every", 0.25}});
  const CrossReport r = cross_validate(c);
  o.detail << "max relative deviation: area " << r.max_area_dev << ", length " << r.max_length_dev
           << "; max |v_mean - v0| " << r.max_v_dev << "; area " << r.area_pde.front() << " -> "
           << r.area_pde.back();
  o.require(r.max_area_dev <= 0.05, "area");
  o.require(r.max_length_dev <= 0.05, "length");
  o.require(std::abs(r.area_pde.back() - r.area_pde.front()) > 0.05 * r.area_pde.front(), "non-trivial dynamics");
}

// 9 ---------------------------------------------------------------------------
void droplet_drift(Outcome& o) {
  const RunConfig c = parse_config(json{{"scenario", "drift-ellipse"},
                                        {"geometry", {{"kind", "ellipse"}, {"params", {2.0, 1.0}}, {"h", 0.02}}},
                                        {"interface", {{"shape", "droplet"}, {"s", 0.1}, {"radius", 0.3}}},
                                        {"eps", 0.05},
                                        {"v_init", 0.079},
                                        {"t_end", 40.0},
                                        {"output_every", 1.0}});
  const Kinetics k = make_kinetics(c.kinetics);
  const auto grid = make_scenario_grid(c.geometry);
  RunOptions opt;
  opt.t_end = c.t_end;
  opt.output_every = c.output_every;
  const RunResult r = run(k, initial_fields(c, k, grid), opt);
  const DomainBoundary& dom = *grid->domain;
  const double L = dom.total_length();
  std::vector<double> d;
  for (const auto& x : r.series) {
    if (x.t >= 2.0) {
      d.push_back(std::isfinite(x.s_estimate)
                      ? std::min(std::abs(dom.param_diff(x.s_estimate, 0.0)), std::abs(dom.param_diff(x.s_estimate, 0.5 * L)))
                      : NAN);
    }
  }
  bool monotone = !d.empty();
  for (std::size_t n = 1; n < d.size(); ++n) monotone = monotone && d[n] < d[n - 1];
  // shape: worst radial misfit of the final contour against its least-squares circle
  const FieldContour fc = interface_contour(k, r.final_state);
  double misfit = NAN, radius = NAN;
  if (fc.curves.size() == 1 && !fc.curves[0].closed()) {
    const auto& pts = fc.curves[0].points;
    Eigen::MatrixXd A(pts.size(), 3);
    Eigen::VectorXd rhs(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      A.row(i) << 2.0 * pts[i].x, 2.0 * pts[i].y, 1.0;
      rhs(i) = pts[i].x * pts[i].x + pts[i].y * pts[i].y;
    }
    const Eigen::Vector3d q = A.colPivHouseholderQr().solve(rhs);
    const Vec2 centre{q(0), q(1)};
    radius = std::sqrt(q(2) + q(0) * q(0) + q(1) * q(1));
    misfit = 0.0;
    for (const Vec2& p : pts) misfit = std::max(misfit, std::abs((p - centre).norm() - radius) / radius);
  }
  o.detail << "tip distance " << d.front() << " -> " << d.back() << " (t >= 2, " << d.size()
           << " samples, monotone " << (monotone ? "yes" : "no") << "), final contour: radius " << radius << ", max radial misfit " << misfit;
  o.require(monotone, "monotone approach to the high-curvature end");
  o.require(d.back() < d.front(), "net approach");
  o.require(misfit < 0.05, "circular-arc shape");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

// Optional arguments pick criteria by number; default is all of them.
int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "front speed oracle", 5.0, front_speed},
      {2, "beta oracle", 1.0, beta_oracle},
      {3, "discrete mass conservation (256^2 masked grid)", 120.0, mass_conservation},
      {4, "1D pinning", 300.0, pinning_1d},
      {5, "area-preserving curvature flow", 60.0, curvature_flow},
      {6, "drift law on Ellipse(2,1)", 600.0, drift_law},
      {7, "reduced ODE equilibria and basins", 5.0, reduced_ode},
      {8, "pde2d vs fbp cross-validation", 1800.0, cross_validation},
      {9, "pde2d droplet drifts toward high curvature", 1800.0, droplet_drift},
  };
  std::vector<int> picked;
  for (int i = 1; i < argc; ++i) picked.push_back(std::atoi(argv[i]));
  int failed = 0, ran = 0;
  for (const Criterion& c : all) {
    if (!picked.empty() && std::find(picked.begin(), picked.end(), c.id) == picked.end()) continue;
    ++ran;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail << " [over time budget " << c.budget_s << " s]";
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s) %.2fs: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
