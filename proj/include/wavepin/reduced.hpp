#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wavepin/geometry.hpp"

namespace wavepin {

/// Droplet attached at boundary position s with shape
///   R(theta) = R0 + sum_{n=2..N} R_n cos(n theta)
/// (no n = 1 entry: that mode is a shift of s).
struct ReducedState {
  double t = 0.0;
  double s = 0.0;
  double R0 = 0.0;
  std::vector<double> R;  // R[n - 2] = R_n, n = 2..N
  double eps = 0.1;
  double l = 0.0;  // w_eps = eps^l w

  std::size_t N() const { return R.size() + 1; }
  double mode(std::size_t n) const { return R.at(n - 2); }
};

/// State with all R_n zero up to mode N (N >= 2).
ReducedState make_reduced_state(double s, double R0, double eps, std::size_t N = 8, double l = 0.0);

struct ReducedCoeffs {
  std::shared_ptr<const DomainBoundary> boundary;
  double cprime_vc = 0.0;  // c'(v_c)
  /// Decreasing map R0 -> w(R0).
  std::function<double(double)> wfun;
  /// e_0 and e_2 need the conformal map; zero unless given.
  std::optional<double> e0_override;
  std::optional<double> e2_override;
};

/// w(R0) = slope (R0 - R0_star), slope < 0.
std::function<double(double)> linear_w(double slope, double R0_star = 0.0);

/// Coefficients with the linear w above. Throws std::invalid_argument for a
/// non-negative slope.
ReducedCoeffs make_reduced_coeffs(std::shared_ptr<const DomainBoundary> boundary, double cprime_vc,
                                  double slope = -1.0, double R0_star = 0.0);

/// e_n(s): 8 K_s / (pi (3 - 4k - 4k^2)) for n = 2k + 1, zero for even n >= 4,
/// the overrides (or zero) for n = 0, 2.
double e_coeff(std::size_t n, double s, const ReducedCoeffs& rc);

struct ReducedRates {
  double s = 0.0;
  double R0 = 0.0;
  std::vector<double> R;  // same layout as ReducedState::R
};

/// ds/dt = (4 eps^2 / 3 pi) K_s(s)
/// dR0/dt = eps^(l-2) c'(v_c) w(R0)
/// dR_n/dt = (-(n^2 - 1) R_n + e_n(s) / 2) / eps
ReducedRates rhs(const ReducedState& st, const ReducedCoeffs& rc);

struct ReducedTrajectory {
  std::vector<ReducedState> samples;
  std::size_t steps = 0;
};

/// Explicit Euler for s and R0, closed-form implicit Euler for the linear
/// R_n equations, s wrapped onto [0, L). The step is halved while the
/// explicit R0 update would be unstable; StepUnderflow once it falls below
/// 1e-12 t_end. Samples at t = 0, every sample_every and at t_end.
ReducedTrajectory integrate(ReducedState st, const ReducedCoeffs& rc, double t_end, double dt,
                            double sample_every);

enum class Stability { Stable, Unstable, Degenerate };

struct Equilibrium {
  double s = 0.0;
  double R0 = 0.0;
  std::vector<double> R;  // R_n* = e_n(s*) / (2 (n^2 - 1)), n = 2..N
  double K = 0.0;
  double K_ss = 0.0;
  Stability stability = Stability::Degenerate;
  /// (4 / 3 pi) K_ss, c'(v_c) w'(R0*), -(n^2 - 1) for n = 2..N.
  std::vector<double> eigenvalues;
};

/// Critical points of K(s) from a scan of K_s at `scan` points refined by
/// bracketing. Roots with |K_ss| <= degenerate_tol are reported as
/// Degenerate. Throws DegenerateCritical when K_s vanishes on the whole scan
/// (every point is critical, as on a circle).
std::vector<Equilibrium> find_equilibria(const ReducedCoeffs& rc, std::size_t N = 8,
                                         std::size_t scan = 4096, double degenerate_tol = 1e-8);

/// R0 with w(R0) = 0, searched outward from 0.
double w_root(const ReducedCoeffs& rc);

std::string to_string(Stability s);

}  // namespace wavepin
