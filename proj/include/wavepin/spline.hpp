#pragma once

#include <cstddef>
#include <vector>

namespace wavepin {

enum class SplineEnd { Natural, Clamped, Periodic };

/// Cubic interpolating spline on strictly increasing, possibly non-uniform
/// knots. For Periodic ends the last value must repeat the first and the
/// period is t.back() - t.front(); evaluation wraps.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> t, std::vector<double> y, SplineEnd end = SplineEnd::Natural,
              double slope_lo = 0.0, double slope_hi = 0.0);

  double operator()(double t) const { return eval(t, 0); }
  double d1(double t) const { return eval(t, 1); }
  double d2(double t) const { return eval(t, 2); }

  double lo() const { return t_.front(); }
  double hi() const { return t_.back(); }
  bool periodic() const { return end_ == SplineEnd::Periodic; }

 private:
  double eval(double t, int order) const;

  SplineEnd end_ = SplineEnd::Natural;
  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

/// Planar curve x(t), y(t) through the given points. The parameter starts as
/// cumulative chord length and is then replaced by the arclength of that
/// first spline, so t is close to arclength.
class CurveSpline {
 public:
  CurveSpline(const std::vector<double>& x, const std::vector<double>& y, bool closed);

  double length_param() const { return x_.hi(); }
  double x(double t) const { return x_(t); }
  double y(double t) const { return y_(t); }
  double dx(double t) const { return x_.d1(t); }
  double dy(double t) const { return y_.d1(t); }
  double curvature(double t) const;
  /// Arclength of the spline itself (Gauss-Legendre per chord interval).
  std::vector<double> arclength_at_knots() const;
  const std::vector<double>& knots() const { return t_; }

  /// n points at equal spline arclength (closed: n distinct points, no
  /// repeat; open: both ends included).
  void resample(std::size_t n, std::vector<double>& xo, std::vector<double>& yo) const;
  /// n points at equal arclength from knot k0 to knot k1, both included.
  void resample_between(std::size_t k0, std::size_t k1, std::size_t n, std::vector<double>& xo,
                        std::vector<double>& yo) const;

 private:
  std::vector<double> t_;
  CubicSpline x_;
  CubicSpline y_;
  bool closed_;
};

}  // namespace wavepin
