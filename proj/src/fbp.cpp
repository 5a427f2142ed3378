#include "wavepin/fbp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavepin/contour.hpp"
#include "wavepin/errors.hpp"

namespace wavepin {

double MassConstraint::F(double v0) const {
  const EquilibriumBranches br = branch_roots(*kinetics, v0);
  return br.u_plus * area_plus + br.u_minus * (area_total - area_plus) + v0 * area_total;
}

double MassConstraint::Lambda(double v0) const {
  const EquilibriumBranches br = branch_roots(*kinetics, v0);
  return br.du_plus * area_plus + br.du_minus * (area_total - area_plus) + area_total;
}

namespace {

// Newton from a nearby root, reusing the branch roots between iterations.
// NaN when it leaves the range or stalls; the bracketed solve takes over.
double polish_v0(const MassConstraint& mc, double M, double v, const Interval& range) {
  const double tol = 1e-12 * std::max(1.0, std::abs(M));
  EquilibriumBranches br = branch_roots(*mc.kinetics, v);
  const double ap = mc.area_plus, am = mc.area_total - mc.area_plus;
  for (int it = 0; it < 8; ++it) {
    const double r = br.u_plus * ap + br.u_minus * am + v * mc.area_total - M;
    if (std::abs(r) <= tol) return v;
    const double d = br.du_plus * ap + br.du_minus * am + mc.area_total;
    v -= r / d;
    if (!(v > range.lo && v < range.hi)) return NAN;
    br = branch_roots(*mc.kinetics, v, br);
  }
  return NAN;
}

}  // namespace

double solve_v0(const MassConstraint& mc, double M, double hint) {
  const Interval range = mc.kinetics->bistable_range();
  if (range.empty()) throw NoSolutionInRange("kinetics are not bistable");
  if (std::isfinite(hint) && hint > range.lo && hint < range.hi) {
    const double v = polish_v0(mc, M, hint, range);
    if (std::isfinite(v)) return v;
  }
  // the folds themselves have a double root; stay a hair inside
  double lo = range.lo + 1e-9 * range.width();
  double hi = range.hi - 1e-9 * range.width();
  double f_lo = mc.F(lo) - M, f_hi = mc.F(hi) - M;
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw NoSolutionInRange("M = " + std::to_string(M) + " outside [" + std::to_string(f_lo + M) +
                            ", " + std::to_string(f_hi + M) + "]");
  }
  double v = std::isfinite(hint) && hint > lo && hint < hi ? hint : lo - f_lo * (hi - lo) / (f_hi - f_lo);
  for (int it = 0; it < 100; ++it) {
    const double r = mc.F(v) - M;
    if (std::abs(r) <= 1e-12 * std::max(1.0, std::abs(M))) return v;
    if (r < 0.0) {
      lo = v;
    } else {
      hi = v;
    }
    double next = v - r / mc.Lambda(v);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == v) return v;
    v = next;
  }
  const double r = mc.F(v) - M;
  if (std::abs(r) <= 1e-10) return v;
  throw NoConvergence("mass constraint residual " + std::to_string(r));
}

std::shared_ptr<const SpeedTable> default_speed_table(const Kinetics& k, std::size_t m) {
  const Interval r = k.bistable_range();
  const double pad = 0.03 * r.width();
  return std::make_shared<const SpeedTable>(k, r.lo + pad, r.hi - pad, m);
}

namespace {

double mean_spacing(const InterfaceCurve& c) {
  const auto h = segment_lengths(c);
  double s = 0.0;
  for (double x : h) s += x;
  return s / static_cast<double>(h.size());
}

}  // namespace

namespace {

FbpState assemble(InterfaceCurve curve, std::shared_ptr<const DomainBoundary> boundary,
                  std::shared_ptr<const Kinetics> kinetics, std::shared_ptr<const SpeedTable> speed,
                  double eps, double h_target) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  FbpState st;
  st.curve = std::move(curve);
  st.boundary = std::move(boundary);
  st.kinetics = std::move(kinetics);
  st.speed = std::move(speed);
  st.eps = eps;
  st.h_target = h_target > 0.0 ? h_target : mean_spacing(st.curve);
  if (!st.curve.closed()) {
    // pin the ends exactly onto the wall
    st.curve.s_start = st.boundary->project(st.curve.points.front(), st.curve.s_start);
    st.curve.s_end = st.boundary->project(st.curve.points.back(), st.curve.s_end);
    st.curve.points.front() = st.boundary->point(st.curve.s_start);
    st.curve.points.back() = st.boundary->point(st.curve.s_end);
  }
  st.area = enclosed_area(st.curve, *st.boundary);
  return st;
}

}  // namespace

FbpState make_fbp_state(InterfaceCurve curve, std::shared_ptr<const DomainBoundary> boundary,
                        std::shared_ptr<const Kinetics> kinetics,
                        std::shared_ptr<const SpeedTable> speed, double eps, double M,
                        double h_target) {
  FbpState st = assemble(std::move(curve), std::move(boundary), std::move(kinetics),
                         std::move(speed), eps, h_target);
  st.M = M;
  const MassConstraint mc{st.area_plus(), st.boundary->area(), st.kinetics.get()};
  st.v0 = solve_v0(mc, M);
  return st;
}

FbpState make_pinned_state(InterfaceCurve curve, std::shared_ptr<const DomainBoundary> boundary,
                           std::shared_ptr<const Kinetics> kinetics,
                           std::shared_ptr<const SpeedTable> speed, double eps, double h_target) {
  FbpState st = assemble(std::move(curve), std::move(boundary), std::move(kinetics),
                         std::move(speed), eps, h_target);
  st.v0 = find_vc(*st.kinetics).vc;
  const MassConstraint mc{st.area_plus(), st.boundary->area(), st.kinetics.get()};
  st.M = mc.F(st.v0);
  return st;
}

std::vector<double> normal_velocity(const FbpState& st) {
  const DomainBoundary* b = st.curve.closed() ? nullptr : st.boundary.get();
  const std::vector<double> kappa = curvature(st.curve, b);
  const double mean = mean_over_curve(st.curve, kappa);
  const double c = st.speed->c(st.v0);
  std::vector<double> v(kappa.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c - st.eps * (kappa[i] - mean);
  return v;
}

namespace {

// Marker polygon area with the end parameters taken as exact (they were just
// projected), which skips two boundary projections per call.
double marker_area(const InterfaceCurve& c, const DomainBoundary& b) {
  const std::size_t n = c.size();
  double a2 = 0.0;
  const std::size_t m = c.closed() ? n : n - 1;
  for (std::size_t i = 0; i < m; ++i) a2 += c.points[i].cross(c.points[(i + 1) % n]);
  double area = 0.5 * a2;
  if (!c.closed()) area += boundary_sector(b, c.s_end, b.wrap(c.s_start - c.s_end));
  return area;
}

// Reflection across the line through p with unit direction tau:
// X' = R X + g with R = 2 tau tau^T - I and g = 2 (nu . p) nu.
struct Mirror {
  Vec2 p, tau, nu;
  Vec2 apply(Vec2 x) const {
    const Vec2 d = x - p;
    return p + tau * (2.0 * d.dot(tau)) - d;
  }
};

Mirror wall_mirror(const DomainBoundary& b, double s, Vec2 p) {
  const Vec2 tau = b.tangent(s);
  return {p, tau, tau.right()};
}

// Band LU with partial pivoting (row interchanges as in LAPACK gbtrf: the
// multipliers stay in place and the swaps are replayed in the solve).
class BandLU {
 public:
  BandLU(std::size_t n, std::size_t kl)
      : n_(n), kl_(kl), w_(3 * kl + 1), a_(n * w_, 0.0), piv_(n) {}

  // j - i must lie in [-kl, kl] before factoring
  double& at(std::size_t i, std::size_t j) { return a_[i * w_ + (j + kl_ - i)]; }

  void factor() {
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t last = std::min(n_ - 1, k + kl_);
      std::size_t p = k;
      for (std::size_t i = k + 1; i <= last; ++i) {
        if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
      }
      piv_[k] = p;
      if (at(p, k) == 0.0) throw SolverDivergence("curvature system is singular");
      const std::size_t jend = std::min(n_ - 1, k + 2 * kl_);
      if (p != k) {
        for (std::size_t j = k; j <= jend; ++j) std::swap(at(k, j), at(p, j));
      }
      const double inv = 1.0 / at(k, k);
      for (std::size_t i = k + 1; i <= last; ++i) {
        const double l = at(i, k) * inv;
        at(i, k) = l;
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j <= jend; ++j) at(i, j) -= l * at(k, j);
      }
    }
  }

  void solve(std::vector<double>& b) {
    for (std::size_t k = 0; k < n_; ++k) {
      std::swap(b[k], b[piv_[k]]);
      const std::size_t last = std::min(n_ - 1, k + kl_);
      for (std::size_t i = k + 1; i <= last; ++i) b[i] -= at(i, k) * b[k];
    }
    for (std::size_t i = n_; i-- > 0;) {
      double s = b[i];
      const std::size_t jend = std::min(n_ - 1, i + 2 * kl_);
      for (std::size_t j = i + 1; j <= jend; ++j) s -= at(i, j) * b[j];
      b[i] = s / at(i, i);
    }
  }

 private:
  std::size_t n_, kl_, w_;
  std::vector<double> a_;
  std::vector<std::size_t> piv_;
};

// Three-point second difference, normals and dual-cell weights of a marker
// curve; attached ends use the mirrored neighbour.
struct Stencil {
  std::vector<double> a, b;  // X_ss = a X_prev - (a + b) X + b X_next
  std::vector<Vec2> normal;
  std::vector<double> kappa;
  std::vector<double> weight;
};

Stencil stencil(const InterfaceCurve& c, const Mirror* m0, const Mirror* m1) {
  const std::size_t n = c.size();
  const auto& X = c.points;
  Stencil s;
  s.a.resize(n);
  s.b.resize(n);
  s.normal.resize(n);
  s.kappa.resize(n);
  s.weight.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 prev, next;
    double wscale = 0.5;
    if (c.closed()) {
      prev = X[(i + n - 1) % n];
      next = X[(i + 1) % n];
    } else if (i == 0) {
      next = X[1];
      prev = m0->apply(next);
      wscale = 0.25;
    } else if (i == n - 1) {
      prev = X[n - 2];
      next = m1->apply(prev);
      wscale = 0.25;
    } else {
      prev = X[i - 1];
      next = X[i + 1];
    }
    const double hp = (X[i] - prev).norm(), hn = (next - X[i]).norm();
    s.a[i] = 2.0 / (hp * (hp + hn));
    s.b[i] = 2.0 / (hn * (hp + hn));
    const Vec2 chord = next - prev;
    s.normal[i] = chord.normalized().right();
    const Vec2 xss = prev * s.a[i] - X[i] * (s.a[i] + s.b[i]) + next * s.b[i];
    s.kappa[i] = -xss.dot(s.normal[i]);
    s.weight[i] = wscale * chord.norm();
  }
  return s;
}

FbpState finish_step(const FbpState& st, InterfaceCurve moved, double dt, const FbpOptions& opt) {
  const DomainBoundary& b = *st.boundary;
  if (!moved.closed()) {
    moved.s_start = b.project(moved.points.front(), st.curve.s_start);
    moved.s_end = b.project(moved.points.back(), st.curve.s_end);
    moved.points.front() = b.point(moved.s_start);
    moved.points.back() = b.point(moved.s_end);
  }
  for (const Vec2& p : moved.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw NonFiniteInput("marker left the plane");
  }
  if (self_intersects(moved)) {
    throw SelfIntersection("interface crossed itself at t = " + std::to_string(st.t + dt));
  }
  const DomainBoundary* bp = moved.closed() ? nullptr : &b;
  const double L = polygon_length(moved);
  const double segs = std::round(L / st.h_target);
  const std::size_t n_new = static_cast<std::size_t>(std::max(0.0, segs)) + (moved.closed() ? 0 : 1);
  if (n_new < opt.min_nodes) {
    throw TopologyChange("interface shrank to " + std::to_string(n_new) + " markers at t = " +
                         std::to_string(st.t + dt));
  }
  FbpState out = st;
  out.curve = redistribute(moved, n_new, bp);
  // Resampling is tangential for the spline but cuts chords differently, and
  // that would ratchet the marker polygon's area a little every step. A
  // uniform normal shift hands the lost area back.
  {
    InterfaceCurve& r = out.curve;
    const double deficit = marker_area(moved, b) - marker_area(r, b);
    const double delta = deficit / polygon_length(r);
    const std::size_t m = r.size();
    std::vector<Vec2> shifted = r.points;
    for (std::size_t i = 0; i < m; ++i) {
      Vec2 prev, next;
      if (r.closed()) {
        prev = r.points[(i + m - 1) % m];
        next = r.points[(i + 1) % m];
      } else {
        prev = r.points[i == 0 ? 0 : i - 1];
        next = r.points[i + 1 == m ? m - 1 : i + 1];
      }
      shifted[i] += (next - prev).normalized().right() * delta;
    }
    r.points = std::move(shifted);
    if (!r.closed()) {
      r.s_start = b.project(r.points.front(), r.s_start);
      r.s_end = b.project(r.points.back(), r.s_end);
      r.points.front() = b.point(r.s_start);
      r.points.back() = b.point(r.s_end);
    }
  }
  if (self_intersects(out.curve)) {
    throw SelfIntersection("interface crossed itself at t = " + std::to_string(st.t + dt));
  }
  out.t = st.t + dt;
  out.area = enclosed_area(out.curve, b);
  const MassConstraint mc{out.area, b.area(), st.kinetics.get()};
  out.v0 = solve_v0(mc, st.M, st.v0);
  return out;
}

}  // namespace

FbpState evolve(const FbpState& st, double dt, const FbpOptions& opt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const InterfaceCurve& c = st.curve;
  const std::size_t n = c.size();
  if (n < opt.min_nodes) throw TopologyChange("interface has only " + std::to_string(n) + " markers");
  const DomainBoundary& b = *st.boundary;
  const double eps = st.eps;
  const double cv = st.speed->c(st.v0);
  std::vector<double> extra(n, 0.0);
  if (opt.extra_velocity) {
    extra = opt.extra_velocity(st);
    if (extra.size() != n) throw std::invalid_argument("extra velocity has the wrong size");
  }

  if (!opt.semi_implicit) {
    const auto h = segment_lengths(c);
    const double hmin = *std::min_element(h.begin(), h.end());
    if (dt > 0.25 * hmin * hmin / eps) {
      throw StabilityBoundViolated("explicit curvature step needs dt <= " +
                                   std::to_string(0.25 * hmin * hmin / eps));
    }
    const std::vector<double> vn = normal_velocity(st);
    const auto nrm = normals(c, c.closed() ? nullptr : &b);
    InterfaceCurve moved = c;
    for (std::size_t i = 0; i < n; ++i) moved.points[i] += nrm[i] * (dt * (vn[i] + extra[i]));
    return finish_step(st, std::move(moved), dt, opt);
  }

  Mirror m0{}, m1{};
  if (!c.closed()) {
    m0 = wall_mirror(b, c.s_start, c.points.front());
    m1 = wall_mirror(b, c.s_end, c.points.back());
  }
  const Stencil sc = stencil(c, &m0, &m1);
  double wsum = 0.0, ksum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += sc.weight[i];
    ksum += sc.weight[i] * sc.kappa[i];
  }
  const double kmean = ksum / wsum;

  // unknowns x_i at 2 slot(i), y_i next to it. Closed curves are numbered
  // zig-zag (0, n-1, 1, n-2, ...) so the wrap-around stays inside the band.
  const bool closed = c.closed();
  auto slot = [&](std::size_t i) {
    if (!closed) return i;
    return 2 * i < n ? 2 * i : 2 * (n - 1 - i) + 1;
  };
  BandLU lu(2 * n, 5);
  std::vector<double> Xa(2 * n), Xb(2 * n);
  auto add = [&](std::size_t r, std::size_t col, double v) { lu.at(r, col) += v; };
  // adds coef * (R X_j + g) to node i, with R, g of a mirror
  auto add_mirrored = [&](std::size_t i, std::size_t j, double coef, const Mirror& m, Vec2& shift) {
    const double txx = 2.0 * m.tau.x * m.tau.x - 1.0, tyy = 2.0 * m.tau.y * m.tau.y - 1.0;
    const double txy = 2.0 * m.tau.x * m.tau.y;
    const std::size_t ri = 2 * slot(i), cj = 2 * slot(j);
    add(ri, cj, coef * txx);
    add(ri, cj + 1, coef * txy);
    add(ri + 1, cj, coef * txy);
    add(ri + 1, cj + 1, coef * tyy);
    shift += m.nu * (2.0 * m.nu.dot(m.p) * coef);
  };
  auto add_plain = [&](std::size_t i, std::size_t j, double coef) {
    const std::size_t ri = 2 * slot(i), cj = 2 * slot(j);
    add(ri, cj, coef);
    add(ri + 1, cj + 1, coef);
  };
  const double k = dt * eps;
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = sc.a[i], bi = sc.b[i];
    const Vec2 drive = sc.normal[i] * (dt * (cv + extra[i]));
    Vec2 r = c.points[i] + drive;
    const std::size_t ri = 2 * slot(i);
    Xb[ri] = dt * eps * sc.normal[i].x;
    Xb[ri + 1] = dt * eps * sc.normal[i].y;
    Vec2 shift{};
    add_plain(i, i, 1.0 + k * (ai + bi));
    if (closed) {
      add_plain(i, (i + n - 1) % n, -k * ai);
      add_plain(i, (i + 1) % n, -k * bi);
    } else if (i == 0) {
      add_mirrored(0, 1, -k * ai, m0, shift);
      add_plain(0, 1, -k * bi);
    } else if (i == n - 1) {
      add_plain(i, i - 1, -k * ai);
      add_mirrored(i, i - 1, -k * bi, m1, shift);
    } else {
      add_plain(i, i - 1, -k * ai);
      add_plain(i, i + 1, -k * bi);
    }
    // the mirror offset is a known term
    Xa[ri] = r.x - shift.x;
    Xa[ri + 1] = r.y - shift.y;
  }
  lu.factor();
  // X = Xa + lambda Xb, where lambda stands in for <kappa>. It is fixed so
  // that the marker polygon gains exactly dt * sum w (c + extra), the
  // discrete form of dA/dt = c L; this makes the nonlocal term an exact area
  // multiplier. lambda differs from the lagged <kappa> by O(dt).
  lu.solve(Xa);
  lu.solve(Xb);
  double gain = 0.0;
  for (std::size_t i = 0; i < n; ++i) gain += sc.weight[i] * (cv + extra[i]);
  const double target = marker_area(c, b) + dt * gain;
  InterfaceCurve moved = c;
  auto place = [&](double lambda) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ix = 2 * slot(i), iy = ix + 1;
      moved.points[i] = {Xa[ix] + lambda * Xb[ix], Xa[iy] + lambda * Xb[iy]};
    }
    if (!moved.closed()) {
      moved.s_start = b.project(moved.points.front(), c.s_start);
      moved.s_end = b.project(moved.points.back(), c.s_end);
      moved.points.front() = b.point(moved.s_start);
      moved.points.back() = b.point(moved.s_end);
    }
    return marker_area(moved, b) - target;
  };
  // secant from the lagged mean; the area is nearly linear in lambda
  double l0 = kmean, g0 = place(l0);
  double l1 = kmean + 1e-3 * (std::abs(kmean) + 1.0), g1 = place(l1);
  const double tol = 1e-14 * std::max(1.0, std::abs(target));
  for (int it = 0; it < 30 && std::abs(g1) > tol && g1 != g0; ++it) {
    const double l2 = l1 - g1 * (l1 - l0) / (g1 - g0);
    l0 = l1;
    g0 = g1;
    l1 = l2;
    g1 = place(l1);
  }
  if (!(std::abs(g1) <= 1e-10 * std::max(1.0, std::abs(target)))) {
    throw NoConvergence("area multiplier did not converge (residual " + std::to_string(g1) + ")");
  }
  return finish_step(st, std::move(moved), dt, opt);
}

AreaRate area_rate_check(const FbpState& before, const FbpState& after) {
  const double dt = after.t - before.t;
  if (!(dt > 0.0)) throw std::invalid_argument("states must be in time order");
  AreaRate r;
  r.lhs = (after.area_plus() - before.area_plus()) / dt;
  r.rhs = before.speed->c(before.v0) * curve_length(before.curve);
  return r;
}

double jump_relation_diagnostic(double v0, const FrontProfile& profile, double D) {
  if (!(D > 0.0)) throw std::invalid_argument("D must be positive");
  if (std::abs(profile.v0 - v0) > 1e-12 * std::max(1.0, std::abs(v0))) {
    throw std::invalid_argument("front profile was computed for another v0");
  }
  return -profile.c * profile.branches.jump() / D;
}

double isoperimetric_ratio(const InterfaceCurve& c, const DomainBoundary& b) {
  const double L = curve_length(c);
  const double A = enclosed_area(c, b);
  return c.closed() ? L * L / (4.0 * M_PI * A) : L * L / (2.0 * M_PI * A);
}

FbpRow fbp_row(const FbpState& st) {
  FbpRow r;
  r.t = st.t;
  r.v0 = st.v0;
  r.area_plus = st.area_plus();
  r.length = curve_length(st.curve);
  r.s_estimate = st.curve.closed() ? NAN : attached_midpoint(st.curve, *st.boundary);
  r.iso_ratio = isoperimetric_ratio(st.curve, *st.boundary);
  return r;
}

FbpTrajectory trajectory(FbpState st, double t_end, double dt, double output_every,
                         const FbpOptions& opt,
                         const std::function<void(const FbpState&)>& on_output) {
  if (!(t_end > 0.0) || !(dt > 0.0)) throw std::invalid_argument("t_end and dt must be positive");
  FbpTrajectory tr;
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(output_every / dt)));
  const double t0 = st.t;
  auto record = [&]() {
    tr.rows.push_back(fbp_row(st));
    if (on_output) on_output(st);
  };
  record();
  double area = st.area_plus();
  for (std::size_t n = 1; n <= steps; ++n) {
    const double v_prev = st.v0;
    st = evolve(st, dt, opt);
    st.t = t0 + static_cast<double>(n) * dt;
    const double a_new = st.area_plus();
    const double dA = a_new - area, dv = st.v0 - v_prev;
    if (dA * dv > 0.0 && std::abs(dA) > 1e-13 && std::abs(dv) > 1e-13) ++tr.monotonicity_violations;
    area = a_new;
    if (n % stride == 0 || n == steps) record();
  }
  tr.steps = steps;
  tr.final_state = std::move(st);
  return tr;
}

}  // namespace wavepin
