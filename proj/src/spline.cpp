#include "wavepin/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "wavepin/errors.hpp"

namespace wavepin {

namespace {

// Thomas algorithm; lo[0] and up[n-1] are ignored. x overwrites rhs.
void solve_tridiagonal(const std::vector<double>& lo, std::vector<double> di,
                       const std::vector<double>& up, std::vector<double>& rhs) {
  const std::size_t n = di.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= di[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
}

// Periodic version: lo[0] couples to the last unknown and up[n-1] to the
// first. Sherman-Morrison on the corner pair.
void solve_cyclic_tridiagonal(const std::vector<double>& lo, std::vector<double> di,
                              const std::vector<double>& up, std::vector<double>& rhs) {
  const std::size_t n = di.size();
  const double alpha = up[n - 1], beta = lo[0];
  const double gamma = -di[0];
  di[0] -= gamma;
  di[n - 1] -= alpha * beta / gamma;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  solve_tridiagonal(lo, di, up, rhs);
  solve_tridiagonal(lo, di, up, u);
  const double fact = (rhs[0] + beta * rhs[n - 1] / gamma) / (1.0 + u[0] + beta * u[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= fact * u[i];
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> t, std::vector<double> y, SplineEnd end,
                         double slope_lo, double slope_hi)
    : end_(end), t_(std::move(t)), y_(std::move(y)) {
  const std::size_t n = t_.size();
  if (n != y_.size()) throw std::invalid_argument("spline: size mismatch");
  if (n < 3) throw TooFewNodes("spline needs at least 3 knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("spline: knots not increasing");
  }
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = t_[i + 1] - t_[i];

  // Standard second-derivative (moment) formulation. The systems are
  // diagonally dominant, so elimination needs no pivoting.
  m_.assign(n, 0.0);
  if (end_ == SplineEnd::Periodic) {
    const std::size_t p = n - 1;  // unknowns m_0..m_{p-1}, m_p = m_0
    std::vector<double> lo(p), di(p), up(p), rhs(p);
    for (std::size_t i = 0; i < p; ++i) {
      const std::size_t im = (i + p - 1) % p;
      const double hl = h[im];
      const double hr = h[i];
      const double yl = y_[(i == 0) ? p - 1 : i - 1];
      const double yr = y_[i + 1];
      lo[i] = hl / 6.0;
      di[i] = (hl + hr) / 3.0;
      up[i] = hr / 6.0;
      rhs[i] = (yr - y_[i]) / hr - (y_[i] - yl) / hl;
    }
    solve_cyclic_tridiagonal(lo, di, up, rhs);
    for (std::size_t i = 0; i < p; ++i) m_[i] = rhs[i];
    m_[p] = m_[0];
    return;
  }
  std::vector<double> lo(n, 0.0), di(n), up(n, 0.0), rhs(n);
  if (end_ == SplineEnd::Natural) {
    di[0] = di[n - 1] = 1.0;
    rhs[0] = rhs[n - 1] = 0.0;
  } else {
    di[0] = h[0] / 3.0;
    up[0] = h[0] / 6.0;
    rhs[0] = (y_[1] - y_[0]) / h[0] - slope_lo;
    lo[n - 1] = h[n - 2] / 6.0;
    di[n - 1] = h[n - 2] / 3.0;
    rhs[n - 1] = slope_hi - (y_[n - 1] - y_[n - 2]) / h[n - 2];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lo[i] = h[i - 1] / 6.0;
    di[i] = (h[i - 1] + h[i]) / 3.0;
    up[i] = h[i] / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1];
  }
  solve_tridiagonal(lo, di, up, rhs);
  m_ = std::move(rhs);
}

double CubicSpline::eval(double t, int order) const {
  if (end_ == SplineEnd::Periodic) {
    const double period = t_.back() - t_.front();
    t = t_.front() + std::fmod(t - t_.front(), period);
    if (t < t_.front()) t += period;
  }
  // interval containing t; extrapolates from the end pieces
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  i = std::min(i, t_.size() - 2);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h;
  const double b = (t - t_[i]) / h;
  const double m0 = m_[i], m1 = m_[i + 1];
  switch (order) {
    case 0:
      return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
    case 1:
      return (y_[i + 1] - y_[i]) / h - (3 * a * a - 1) * h / 6.0 * m0 +
             (3 * b * b - 1) * h / 6.0 * m1;
    case 2:
      return a * m0 + b * m1;
    default:
      return (m1 - m0) / h;
  }
}

CurveSpline::CurveSpline(const std::vector<double>& x, const std::vector<double>& y, bool closed)
    : closed_(closed) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) throw TooFewNodes("curve spline needs at least 3 points");
  std::vector<double> xs = x, ys = y;
  if (closed) {
    xs.push_back(x.front());
    ys.push_back(y.front());
  }
  t_.assign(xs.size(), 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double d = std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
    if (!(d > 0.0)) throw NonSimpleCurve("coincident consecutive nodes");
    t_[i] = t_[i - 1] + d;
  }
  const SplineEnd end = closed ? SplineEnd::Periodic : SplineEnd::Natural;
  x_ = CubicSpline(t_, xs, end);
  y_ = CubicSpline(t_, ys, end);
  // one pass of reparametrization by the spline's own arclength; chord
  // lengths alone leave an O(h^2) error in the curvature
  t_ = arclength_at_knots();
  x_ = CubicSpline(t_, xs, end);
  y_ = CubicSpline(t_, ys, end);
}

double CurveSpline::curvature(double t) const {
  const double xp = x_.d1(t), yp = y_.d1(t);
  const double xpp = x_.d2(t), ypp = y_.d2(t);
  return (xp * ypp - yp * xpp) / std::pow(xp * xp + yp * yp, 1.5);
}

std::vector<double> CurveSpline::arclength_at_knots() const {
  std::vector<double> s(t_.size(), 0.0);
  for (std::size_t i = 1; i < t_.size(); ++i) {
    auto speed = [this](double t) { return std::hypot(x_.d1(t), y_.d1(t)); };
    s[i] = s[i - 1] + boost::math::quadrature::gauss<double, 10>::integrate(speed, t_[i - 1], t_[i]);
  }
  return s;
}

void CurveSpline::resample(std::size_t n, std::vector<double>& xo, std::vector<double>& yo) const {
  if (closed_) {
    // n + 1 points over the full period, the repeated end dropped
    resample_between(0, t_.size() - 1, n + 1, xo, yo);
    xo.pop_back();
    yo.pop_back();
  } else {
    resample_between(0, t_.size() - 1, n, xo, yo);
  }
}

void CurveSpline::resample_between(std::size_t k0, std::size_t k1, std::size_t n,
                                   std::vector<double>& xo, std::vector<double>& yo) const {
  const std::vector<double> s = arclength_at_knots();
  const double total = s[k1] - s[k0];
  const double ds = total / static_cast<double>(n - 1);
  xo.resize(n);
  yo.resize(n);
  auto speed = [this](double t) { return std::hypot(x_.d1(t), y_.d1(t)); };
  std::size_t seg = k0;
  xo[0] = x_(t_[k0]);
  yo[0] = y_(t_[k0]);
  xo[n - 1] = x_(t_[k1]);
  yo[n - 1] = y_(t_[k1]);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double target = s[k0] + ds * static_cast<double>(j);
    while (seg + 1 < k1 && s[seg + 1] < target) ++seg;
    // Newton for t with arclength(t) = target inside knot interval seg
    const double t0 = t_[seg];
    double t = t0 + (target - s[seg]) / (s[seg + 1] - s[seg]) * (t_[seg + 1] - t0);
    for (int it = 0; it < 8; ++it) {
      const double len =
          s[seg] + boost::math::quadrature::gauss<double, 10>::integrate(speed, t0, t);
      const double step = (len - target) / speed(t);
      t -= step;
      if (std::abs(step) < 1e-14 * (s.back() - s.front())) break;
    }
    xo[j] = x_(t);
    yo[j] = y_(t);
  }
}

}  // namespace wavepin
