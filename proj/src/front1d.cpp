#include "wavepin/front1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "wavepin/errors.hpp"

namespace wavepin {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;  // (U, P = U')

// The branches start a distance kDelta from the rest state, so the error
// control must be relative; an absolute floor would swamp the early steps.
constexpr double kOdeRel = 1e-12;
constexpr double kOdeAbs = 1e-18;
constexpr double kDelta = 1e-7;  // offset from the rest state along the eigenvector

// Linearization rates of the front ODE at the two rest states: the unstable
// rate at u_+ and the (negative) stable rate at u_-.
struct Rates {
  double mu_plus;
  double lambda_minus;
};

Rates linear_rates(const Kinetics& k, const EquilibriumBranches& b, double c) {
  const double fp = k.eval(b.u_plus, b.v).f_u;
  const double fm = k.eval(b.u_minus, b.v).f_u;
  return {0.5 * (-c + std::sqrt(c * c - 4.0 * fp)), 0.5 * (-c - std::sqrt(c * c - 4.0 * fm))};
}

// One manifold branch integrated until U hits u_m. `dir` = +1 integrates
// forward in z (left branch), -1 backward (right branch). Time is measured in
// |z| from the start point.
struct Branch {
  bool reached = false;
  double P = 0.0;      // slope at U = u_m (0 if the branch turned back)
  double T = 0.0;      // travel time to U = u_m
  State start{};
  std::vector<double> ts;  // accepted step times, filled when recording
  std::vector<State> xs;
};

class FrontOde {
 public:
  FrontOde(const Kinetics& k, double v, double c, double dir) : k_(k), v_(v), c_(c), dir_(dir) {}
  void operator()(const State& x, State& dxdt, double) const {
    dxdt[0] = dir_ * x[1];
    dxdt[1] = dir_ * (-c_ * x[1] - k_.f(x[0], v_));
  }

 private:
  const Kinetics& k_;
  double v_, c_, dir_;
};

Branch shoot(const Kinetics& k, const EquilibriumBranches& b, double c, bool left,
             bool record = false) {
  const Rates r = linear_rates(k, b, c);
  Branch out;
  const double rate = left ? r.mu_plus : r.lambda_minus;
  out.start = left ? State{b.u_plus - kDelta, -kDelta * rate}
                   : State{b.u_minus + kDelta, kDelta * rate};
  const double tmax = 200.0 / std::abs(rate);
  FrontOde ode(k, b.v, c, left ? 1.0 : -1.0);

  auto stepper = odeint::make_controlled(kOdeAbs, kOdeRel, odeint::runge_kutta_dopri5<State>());
  const double um = b.u_mid;
  const double sgn = left ? 1.0 : -1.0;  // dU/dt = sgn * P
  // g > 0 before the crossing, g <= 0 after
  auto g = [&](const State& x) { return left ? x[0] - um : um - x[0]; };
  State x = out.start;
  double t = 0.0;
  double dt = 0.1 / std::abs(rate);
  if (record) {
    out.ts.push_back(t);
    out.xs.push_back(x);
  }
  while (t < tmax) {
    const State x_prev = x;
    const double t_prev = t;
    if (stepper.try_step(ode, x, t, dt) != odeint::success) continue;
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) break;
    if (x[1] >= 0.0) return out;  // turned back before reaching u_m
    if (record && g(x) > 0.0) {
      out.ts.push_back(t);
      out.xs.push_back(x);
    }
    if (g(x) <= 0.0) {
      // Newton on the crossing time, each iterate integrated afresh from the
      // last accepted state so the crossing is resolved at full accuracy
      double ts = t_prev + (t - t_prev) * (x_prev[0] - um) / (x_prev[0] - x[0]);
      State y{};
      for (int it = 0; it < 8; ++it) {
        y = x_prev;
        if (ts > t_prev) {
          odeint::integrate_adaptive(stepper, ode, y, t_prev, ts, (ts - t_prev) / 4);
        }
        const double corr = (y[0] - um) / (sgn * y[1]);
        ts -= corr;
        if (std::abs(corr) < 1e-15 * std::max(1.0, ts)) break;
      }
      out.reached = true;
      out.T = ts;
      out.P = y[1];
      return out;
    }
  }
  return out;
}

double mismatch(const Kinetics& k, const EquilibriumBranches& b, double c) {
  const Branch L = shoot(k, b, c, true);
  const Branch R = shoot(k, b, c, false);
  return L.P - R.P;
}

// State at time t on a recorded branch, integrated from the last accepted
// step at or before t so that it lies on the very trajectory used for the
// crossing.
State branch_state(const Kinetics& k, const EquilibriumBranches& b, double c, bool left,
                   const Branch& br, double t) {
  auto it = std::upper_bound(br.ts.begin(), br.ts.end(), t);
  const std::size_t j = it == br.ts.begin() ? 0 : static_cast<std::size_t>(it - br.ts.begin()) - 1;
  State x = br.xs[j];
  if (t > br.ts[j]) {
    FrontOde ode(k, b.v, c, left ? 1.0 : -1.0);
    auto stepper = odeint::make_controlled(kOdeAbs, kOdeRel, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_adaptive(stepper, ode, x, br.ts[j], t, (t - br.ts[j]) / 4);
  }
  return x;
}

}  // namespace

double default_front_halfwidth(const Kinetics& k, double v0) {
  const EquilibriumBranches b = branch_roots(k, v0);
  const double mu = std::min(std::sqrt(-k.eval(b.u_plus, v0).f_u),
                             std::sqrt(-k.eval(b.u_minus, v0).f_u));
  return 20.0 / mu;
}

double simpson(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 3 || n % 2 == 0) throw DegenerateProfile("simpson needs an odd sample count >= 3");
  double s = y.front() + y.back();
  for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0;
}

FrontProfile solve_front(const Kinetics& k, double v0, double Z, std::size_t n, double z_phase) {
  if (n < 3) throw DegenerateProfile("too few samples");
  if (n % 2 == 0) ++n;
  const EquilibriumBranches b = branch_roots(k, v0);
  if (Z <= 0.0) Z = default_front_halfwidth(k, v0);

  // Bracket the speed by symmetric expansion around c = 0.
  const double g0 = mismatch(k, b, 0.0);
  double lo = 0.0, hi = 0.0, glo = g0, ghi = g0;
  bool bracketed = g0 == 0.0;
  double prev = 0.0, gprev_p = g0, gprev_m = g0;
  for (double a = 0.125; !bracketed && a <= 64.0; a *= 2.0) {
    const double gp = mismatch(k, b, a);
    const double gm = mismatch(k, b, -a);
    if ((gp < 0.0) != (g0 < 0.0) || gp == 0.0) {
      lo = prev;
      glo = gprev_p;
      hi = a;
      ghi = gp;
      bracketed = true;
    } else if ((gm < 0.0) != (g0 < 0.0) || gm == 0.0) {
      lo = -a;
      glo = gm;
      hi = -prev;
      ghi = gprev_m;
      bracketed = true;
    }
    prev = a;
    gprev_p = gp;
    gprev_m = gm;
  }
  if (!bracketed) {
    throw NoConvergence("no sign change of the shooting mismatch for v0 = " + std::to_string(v0));
  }

  double c = 0.0;
  if (glo == 0.0) {
    c = lo;
  } else if (ghi == 0.0) {
    c = hi;
  } else {
    boost::uintmax_t iters = 200;
    auto tol = [](double a, double bb) { return std::abs(a - bb) <= 1e-14; };
    auto res = boost::math::tools::toms748_solve([&](double cc) { return mismatch(k, b, cc); },
                                                 lo, hi, glo, ghi, tol, iters);
    c = 0.5 * (res.first + res.second);
  }

  const Branch L = shoot(k, b, c, true, true);
  const Branch R = shoot(k, b, c, false, true);
  if (!L.reached || !R.reached) throw NoConvergence("front branches do not reach u_m");
  const Rates r = linear_rates(k, b, c);

  FrontProfile p;
  p.v0 = v0;
  p.c = c;
  p.z_phase = z_phase;
  p.branches = b;
  p.z.resize(n);
  p.U.resize(n);
  p.dU.resize(n);
  const double dz = 2.0 * Z / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) p.z[i] = -Z + dz * static_cast<double>(i);
  p.z[n / 2] = 0.0;

  // Left of the phase point: left branch at time T_L + (z - z_phase); right
  // of it: right branch at T_R - (z - z_phase). Beyond the integrated range
  // the linear asymptote takes over.
  for (std::size_t i = 0; i < n; ++i) {
    const double zz = p.z[i] - z_phase;
    const bool left = zz <= 0.0;
    const Branch& br = left ? L : R;
    const double t = left ? L.T + zz : R.T - zz;
    if (zz == 0.0) {
      p.U[i] = b.u_mid;
      p.dU[i] = L.P;
    } else if (t >= 0.0) {
      const State x = branch_state(k, b, c, left, br, t);
      p.U[i] = x[0];
      p.dU[i] = x[1];
    } else if (left) {
      const double e = kDelta * std::exp(r.mu_plus * t);
      p.U[i] = b.u_plus - e;
      p.dU[i] = -r.mu_plus * e;
    } else {
      const double e = kDelta * std::exp(-r.lambda_minus * t);
      p.U[i] = b.u_minus + e;
      p.dU[i] = r.lambda_minus * e;
    }
  }

  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = p.dU[i] * p.dU[i];
  p.sigma = simpson(sq, dz);
  if (!(p.sigma > 0.0)) throw DegenerateProfile("sigma = " + std::to_string(p.sigma));
  return p;
}

double speed_by_quadrature(const FrontProfile& p, const Kinetics& k) {
  if (!(p.sigma > 0.0)) throw DegenerateProfile("sigma <= 0");
  return integral_I(k, p.v0) / p.sigma;
}

double beta(const FrontProfile& p, const Kinetics& k) {
  const std::size_t n = p.z.size();
  if (n < 3 || n % 2 == 0) throw DegenerateProfile("beta needs a symmetric odd grid");
  std::vector<double> num(n), den(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double reflected = p.dU[n - 1 - i];
    num[i] = k.eval(p.U[i], p.v0).f_v * reflected;
    den[i] = p.dU[i] * reflected;
  }
  const double d = simpson(den, p.dz());
  if (std::abs(d) <= 1e-12) throw DegenerateProfile("reflected overlap vanishes");
  return simpson(num, p.dz()) / d;
}

SpeedTable::SpeedTable(const Kinetics& k, double v_lo, double v_hi, std::size_t m)
    : v_lo_(v_lo), v_hi_(v_hi) {
  if (m < 8) throw RangeError("speed table needs at least 8 nodes");
  if (!(v_hi > v_lo)) throw RangeError("empty speed table interval");
  const Interval range = k.bistable_range();
  if (!range.contains(v_lo) || !range.contains(v_hi)) {
    throw OutsideBistableRange("speed table interval leaves the bistable range");
  }
  const double h = (v_hi - v_lo) / static_cast<double>(m - 1);
  v_.resize(m);
  c_.resize(m);
  beta_.resize(m);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
    v_[i] = v_lo + h * static_cast<double>(i);
    const FrontProfile p = solve_front(k, v_[i]);
    c_[i] = p.c;
    beta_[i] = wavepin::beta(p, k);
  }
  // Fourth-order one-sided end slopes; the spline's own estimate is too crude
  // near the folds where c(v) steepens.
  auto end_slopes = [h, m](const std::vector<double>& y) {
    const double l = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h);
    const double r = (25 * y[m - 1] - 48 * y[m - 2] + 36 * y[m - 3] - 16 * y[m - 4] + 3 * y[m - 5]) /
                     (12 * h);
    return std::pair{l, r};
  };
  const auto [cl, cr] = end_slopes(c_);
  const auto [bl, br] = end_slopes(beta_);
  c_spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(c_.data(), m, v_lo, h,
                                                                          cl, cr);
  beta_spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(beta_.data(), m,
                                                                             v_lo, h, bl, br);
}

void SpeedTable::check(double v) const {
  if (!(v >= v_lo_ && v <= v_hi_)) {
    throw RangeError("v = " + std::to_string(v) + " outside the speed table [" +
                     std::to_string(v_lo_) + ", " + std::to_string(v_hi_) + "]");
  }
}

double SpeedTable::c(double v) const {
  check(v);
  return c_spline_(v);
}

double SpeedTable::dc(double v) const {
  check(v);
  return c_spline_.prime(v);
}

double SpeedTable::beta(double v) const {
  check(v);
  return beta_spline_(v);
}

SpeedTable speed_table(const Kinetics& k, double v_lo, double v_hi, std::size_t m) {
  return SpeedTable(k, v_lo, v_hi, m);
}

}  // namespace wavepin
