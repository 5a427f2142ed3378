#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "wavepin/front1d.hpp"
#include "wavepin/geometry.hpp"
#include "wavepin/kinetics.hpp"

namespace wavepin {

/// Leading-order mass constraint
///   F(v0) = u_+(v0) A_+ + u_-(v0) (|Omega| - A_+) + v0 |Omega|.
struct MassConstraint {
  double area_plus = 0.0;
  double area_total = 0.0;
  const Kinetics* kinetics = nullptr;

  double F(double v0) const;
  /// F'(v0) = u_+' A_+ + u_-' A_- + |Omega|.
  double Lambda(double v0) const;
};

/// Newton on F(v0) = M with derivative Lambda, kept inside a bracket on the
/// bistable range. |F(v0) - M| <= 1e-10 on return. `hint` seeds Newton.
double solve_v0(const MassConstraint& mc, double M, double hint = NAN);

/// c(v) and beta(v) over most of the bistable range (the fold points are left
/// out because the front degenerates there).
std::shared_ptr<const SpeedTable> default_speed_table(const Kinetics& k, std::size_t m = 97);

struct FbpState {
  InterfaceCurve curve;
  double v0 = 0.0;
  double eps = 0.0;
  double M = 0.0;
  double t = 0.0;
  double h_target = 0.0;  // marker spacing kept after each step
  std::shared_ptr<const DomainBoundary> boundary;
  std::shared_ptr<const Kinetics> kinetics;
  std::shared_ptr<const SpeedTable> speed;

  /// |Omega_+| of `curve`, kept by evolve; NaN means not known yet. Reset it
  /// after editing the curve by hand.
  double area = NAN;

  double area_plus() const { return std::isfinite(area) ? area : enclosed_area(curve, *boundary); }
};

/// State with v0 solved from M. h_target <= 0 keeps the current mean spacing.
FbpState make_fbp_state(InterfaceCurve curve, std::shared_ptr<const DomainBoundary> boundary,
                        std::shared_ptr<const Kinetics> kinetics,
                        std::shared_ptr<const SpeedTable> speed, double eps, double M,
                        double h_target = 0.0);

/// Same, with M chosen so that the initial area is pinned (v0 = v_c).
FbpState make_pinned_state(InterfaceCurve curve, std::shared_ptr<const DomainBoundary> boundary,
                           std::shared_ptr<const Kinetics> kinetics,
                           std::shared_ptr<const SpeedTable> speed, double eps,
                           double h_target = 0.0);

/// V_n = c(v0) - eps (kappa - <kappa>) per node, kappa from the curvature
/// spline and <kappa> its arclength mean.
std::vector<double> normal_velocity(const FbpState& st);

struct FbpOptions {
  /// Curvature term implicit (tridiagonal in the node positions). The
  /// explicit branch needs dt <= 0.25 h^2 / eps.
  bool semi_implicit = true;
  std::size_t min_nodes = 6;
  /// Extra normal velocity per node added to c(v0); the v1 correction
  /// beta(v0) (v1 - <v1>) would enter here. Empty means zero.
  std::function<std::vector<double>(const FbpState&)> extra_velocity;
};

/// One step of V_n = c(v0) - eps (kappa - <kappa>):
///   X - dt eps X_ss = X^n + dt (c(v0) + eps <kappa>) n^n
/// with X_ss by three-point differences on the current spacing, then
/// equal-arclength redistribution and a new v0. Attached ends are mirrored
/// across the boundary tangent line, so the curve meets the wall at a right
/// angle, and are projected back onto the boundary.
/// Throws SelfIntersection, TopologyChange (fewer than min_nodes at the target
/// spacing), NoSolutionInRange, StabilityBoundViolated (explicit branch).
FbpState evolve(const FbpState& st, double dt, const FbpOptions& opt = {});

struct AreaRate {
  double lhs = 0.0;  // (A_after - A_before) / dt
  double rhs = 0.0;  // c(v0) L at the earlier state
};

AreaRate area_rate_check(const FbpState& before, const FbpState& after);

/// Normal-derivative jump -c(v0) [u0] / D that the first correction to v
/// must carry across the interface.
double jump_relation_diagnostic(double v0, const FrontProfile& profile, double D);

/// L^2 / (4 pi A) for closed curves; L^2 / (2 pi A) for attached ones, so a
/// half disk on a straight wall also gives 1.
double isoperimetric_ratio(const InterfaceCurve& c, const DomainBoundary& b);

struct FbpRow {
  double t = 0.0;
  double v0 = 0.0;
  double area_plus = 0.0;
  double length = 0.0;
  double s_estimate = 0.0;  // NaN for closed curves
  double iso_ratio = 0.0;
};

FbpRow fbp_row(const FbpState& st);

struct FbpTrajectory {
  std::vector<FbpRow> rows;
  FbpState final_state;
  std::size_t steps = 0;
  /// Sign test along the run: every step where A_+ grew must lower v0 and the
  /// reverse. Counts the steps that broke it (with a roundoff allowance).
  std::size_t monotonicity_violations = 0;
};

/// Fixed steps to t_end; rows at t = 0, every output_every and at the end.
FbpTrajectory trajectory(FbpState st, double t_end, double dt, double output_every,
                         const FbpOptions& opt = {},
                         const std::function<void(const FbpState&)>& on_output = {});

}  // namespace wavepin
