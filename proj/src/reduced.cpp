#include "wavepin/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "wavepin/errors.hpp"

namespace wavepin {

ReducedState make_reduced_state(double s, double R0, double eps, std::size_t N, double l) {
  if (N < 2) throw std::invalid_argument("mode cutoff must be at least 2");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(l >= 0.0)) throw std::invalid_argument("l must be non-negative");
  ReducedState st;
  st.s = s;
  st.R0 = R0;
  st.R.assign(N - 1, 0.0);
  st.eps = eps;
  st.l = l;
  return st;
}

std::function<double(double)> linear_w(double slope, double R0_star) {
  return [slope, R0_star](double r) { return slope * (r - R0_star); };
}

ReducedCoeffs make_reduced_coeffs(std::shared_ptr<const DomainBoundary> boundary, double cprime_vc,
                                  double slope, double R0_star) {
  if (!boundary) throw std::invalid_argument("boundary is required");
  if (!(slope < 0.0)) throw std::invalid_argument("w must be decreasing (slope < 0)");
  ReducedCoeffs rc;
  rc.boundary = std::move(boundary);
  rc.cprime_vc = cprime_vc;
  rc.wfun = linear_w(slope, R0_star);
  return rc;
}

double e_coeff(std::size_t n, double s, const ReducedCoeffs& rc) {
  if (n == 0) return rc.e0_override.value_or(0.0);
  if (n == 2) return rc.e2_override.value_or(0.0);
  if (n % 2 == 0) return 0.0;
  const double k = static_cast<double>((n - 1) / 2);
  return 8.0 * rc.boundary->curvature(s).K_s / (M_PI * (3.0 - 4.0 * k - 4.0 * k * k));
}

namespace {

double drift_rate(double eps, double K_s) { return 4.0 * eps * eps / (3.0 * M_PI) * K_s; }

double mode_damping(std::size_t n) {
  const double m = static_cast<double>(n);
  return m * m - 1.0;
}

double w_slope(const ReducedCoeffs& rc, double r) {
  const double h = 1e-6 * std::max(1.0, std::abs(r));
  return (rc.wfun(r + h) - rc.wfun(r - h)) / (2.0 * h);
}

}  // namespace

ReducedRates rhs(const ReducedState& st, const ReducedCoeffs& rc) {
  ReducedRates d;
  d.s = drift_rate(st.eps, rc.boundary->curvature(st.s).K_s);
  d.R0 = std::pow(st.eps, st.l - 2.0) * rc.cprime_vc * rc.wfun(st.R0);
  d.R.resize(st.R.size());
  for (std::size_t n = 2; n <= st.N(); ++n) {
    d.R[n - 2] = (-mode_damping(n) * st.R[n - 2] + 0.5 * e_coeff(n, st.s, rc)) / st.eps;
  }
  return d;
}

ReducedTrajectory integrate(ReducedState st, const ReducedCoeffs& rc, double t_end, double dt,
                            double sample_every) {
  if (!(t_end > 0.0) || !(dt > 0.0)) throw std::invalid_argument("t_end and dt must be positive");
  const DomainBoundary& b = *rc.boundary;
  const double floor = 1e-12 * t_end;
  const double r0_scale = std::pow(st.eps, st.l - 2.0) * rc.cprime_vc;
  ReducedTrajectory tr;
  const double t0 = st.t;
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sample_every / dt)));
  tr.samples.push_back(st);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_target = t0 + static_cast<double>(k) * dt;
    while (st.t < t_target) {
      double h = std::min(dt, t_target - st.t);
      // explicit Euler on R0 is stable for h |dR0'/dR0| < 2; stay at 1
      while (h * std::abs(r0_scale * w_slope(rc, st.R0)) > 1.0) {
        h *= 0.5;
        if (h < floor) {
          throw StepUnderflow("R0 equation needs steps below " + std::to_string(floor) +
                              " at t = " + std::to_string(st.t));
        }
      }
      const double ds = drift_rate(st.eps, b.curvature(st.s).K_s);
      const double dR0 = r0_scale * rc.wfun(st.R0);
      st.s = b.wrap(st.s + h * ds);
      st.R0 += h * dR0;
      for (std::size_t n = 2; n <= st.N(); ++n) {
        const double a = h / st.eps;
        st.R[n - 2] = (st.R[n - 2] + a * 0.5 * e_coeff(n, st.s, rc)) / (1.0 + a * mode_damping(n));
      }
      st.t = (t_target - st.t <= h * (1.0 + 1e-12)) ? t_target : st.t + h;
      if (!std::isfinite(st.s) || !std::isfinite(st.R0)) {
        throw StepUnderflow("reduced state became non-finite at t = " + std::to_string(st.t));
      }
    }
    if (k % stride == 0 || k == steps) tr.samples.push_back(st);
  }
  tr.steps = steps;
  return tr;
}

double w_root(const ReducedCoeffs& rc) {
  const auto& w = rc.wfun;
  const double w0 = w(0.0);
  if (w0 == 0.0) return 0.0;
  // decreasing: the root lies to the right when w(0) > 0
  double lo = 0.0, hi = 0.0, step = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double x = w0 > 0.0 ? step : -step;
    if ((w(x) > 0.0) != (w0 > 0.0) || w(x) == 0.0) {
      lo = std::min(0.0, x);
      hi = std::max(0.0, x);
      break;
    }
    step *= 2.0;
  }
  if (lo == hi) throw NoSignChange("w has no root");
  std::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve(
      w, lo, hi, boost::math::tools::eps_tolerance<double>(52), it);
  return 0.5 * (r.first + r.second);
}

std::vector<Equilibrium> find_equilibria(const ReducedCoeffs& rc, std::size_t N, std::size_t scan,
                                         double degenerate_tol) {
  if (N < 2) throw std::invalid_argument("mode cutoff must be at least 2");
  if (scan < 8) throw std::invalid_argument("scan needs at least 8 points");
  const DomainBoundary& b = *rc.boundary;
  const double L = b.total_length();
  auto ks = [&](double s) { return b.curvature(s).K_s; };
  std::vector<double> f(scan + 1);
  double fmax = 0.0;
  for (std::size_t i = 0; i <= scan; ++i) {
    f[i] = ks(L * static_cast<double>(i) / static_cast<double>(scan));
    fmax = std::max(fmax, std::abs(f[i]));
  }
  if (fmax <= degenerate_tol) {
    throw DegenerateCritical("K_s vanishes along the whole boundary");
  }
  // a sample within roundoff of zero counts as a root; the next interval is
  // then skipped so the same root is not bracketed twice
  const double zero = 1e-13 * fmax;
  std::vector<double> roots;
  for (std::size_t i = 0; i < scan; ++i) {
    const double a = L * static_cast<double>(i) / static_cast<double>(scan);
    const double c = L * static_cast<double>(i + 1) / static_cast<double>(scan);
    if (std::abs(f[i]) <= zero) {
      roots.push_back(a);
      continue;
    }
    if (std::abs(f[i + 1]) <= zero) continue;
    if ((f[i] < 0.0) != (f[i + 1] < 0.0)) {
      std::uintmax_t it = 200;
      const auto r = boost::math::tools::toms748_solve(
          ks, a, c, f[i], f[i + 1], boost::math::tools::eps_tolerance<double>(50), it);
      roots.push_back(0.5 * (r.first + r.second));
    }
  }
  // s = 0 and s = L are the same point
  for (double& r : roots) r = b.wrap(r);
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() || r - unique.back() > 1e-9 * L) unique.push_back(r);
  }
  if (unique.size() > 1 && unique.front() + L - unique.back() <= 1e-9 * L) unique.pop_back();
  roots = std::move(unique);
  const double r0 = w_root(rc);
  const double cw = rc.cprime_vc * w_slope(rc, r0);
  std::vector<Equilibrium> out;
  for (double s : roots) {
    Equilibrium e;
    e.s = b.wrap(s);
    const BoundaryCurvature k = b.curvature(e.s);
    e.K = k.K;
    e.K_ss = k.K_ss;
    e.R0 = r0;
    e.R.resize(N - 1);
    for (std::size_t n = 2; n <= N; ++n) e.R[n - 2] = e_coeff(n, e.s, rc) / (2.0 * mode_damping(n));
    e.eigenvalues.push_back(4.0 / (3.0 * M_PI) * k.K_ss);
    e.eigenvalues.push_back(cw);
    for (std::size_t n = 2; n <= N; ++n) e.eigenvalues.push_back(-mode_damping(n));
    if (std::abs(k.K_ss) <= degenerate_tol) {
      e.stability = Stability::Degenerate;
    } else {
      e.stability = k.K_ss < 0.0 && cw < 0.0 ? Stability::Stable : Stability::Unstable;
    }
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const Equilibrium& x, const Equilibrium& y) { return x.s < y.s; });
  return out;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable:
      return "stable";
    case Stability::Unstable:
      return "unstable";
    case Stability::Degenerate:
      return "degenerate";
  }
  return "unknown";
}

}  // namespace wavepin
