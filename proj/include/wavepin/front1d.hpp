#pragma once

#include <cstddef>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "wavepin/kinetics.hpp"

namespace wavepin {

/// Heteroclinic front U'' + c U' + f(U, v0) = 0 from u_+ (z -> -inf) down to
/// u_- (z -> +inf), sampled on a uniform symmetric grid.
struct FrontProfile {
  double v0 = 0.0;
  double c = 0.0;
  double z_phase = 0.0;  // U(z_phase) = u_m
  std::vector<double> z;
  std::vector<double> U;
  std::vector<double> dU;
  double sigma = 0.0;  // integral of dU^2
  EquilibriumBranches branches;

  double dz() const { return z.size() > 1 ? z[1] - z[0] : 0.0; }
  double Z() const { return z.empty() ? 0.0 : z.back(); }
};

/// Default half-width: 20 linear decay lengths at the slower end.
double default_front_halfwidth(const Kinetics& k, double v0);

/// Shooting on c: the unstable manifold of u_+ and the stable manifold of u_-
/// are integrated (dopri5, tol 1e-12) to the level U = u_m and their slopes
/// matched there. Z <= 0 picks default_front_halfwidth. n is rounded up to an
/// odd count so Simpson's rule applies.
FrontProfile solve_front(const Kinetics& k, double v0, double Z = 0.0,
                         std::size_t n = 2049, double z_phase = 0.0);

/// I(v0) / sigma.
double speed_by_quadrature(const FrontProfile& p, const Kinetics& k);

/// Reflected-kernel ratio: int f_v(U, v0) U'(-z) dz / int U'(z) U'(-z) dz.
double beta(const FrontProfile& p, const Kinetics& k);

/// Composite Simpson on a uniform grid with an odd number of samples.
double simpson(const std::vector<double>& y, double h);

/// Cubic B-spline interpolant of c(v) and beta(v) over [v_lo, v_hi].
class SpeedTable {
 public:
  SpeedTable(const Kinetics& k, double v_lo, double v_hi, std::size_t m);

  double c(double v) const;
  double dc(double v) const;
  double beta(double v) const;

  double v_lo() const { return v_lo_; }
  double v_hi() const { return v_hi_; }
  const std::vector<double>& nodes() const { return v_; }
  const std::vector<double>& c_nodes() const { return c_; }
  const std::vector<double>& beta_nodes() const { return beta_; }

 private:
  void check(double v) const;

  double v_lo_;
  double v_hi_;
  std::vector<double> v_;
  std::vector<double> c_;
  std::vector<double> beta_;
  boost::math::interpolators::cardinal_cubic_b_spline<double> c_spline_;
  boost::math::interpolators::cardinal_cubic_b_spline<double> beta_spline_;
};

SpeedTable speed_table(const Kinetics& k, double v_lo, double v_hi, std::size_t m);

}  // namespace wavepin
