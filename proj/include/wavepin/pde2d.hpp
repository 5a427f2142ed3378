#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "wavepin/contour.hpp"
#include "wavepin/grid.hpp"
#include "wavepin/helmholtz.hpp"
#include "wavepin/kinetics.hpp"

namespace wavepin {

/// Fields of the wave-pinning system on the masked cells of a grid, in the
/// slow time t of  eps u_t = eps^2 Lap u + f,  eps v_t = D Lap v - f.
/// Masked-out cells hold 0 and are never touched.
struct SimState {
  std::shared_ptr<const GridSpec> grid;
  std::vector<double> u;
  std::vector<double> v;
  double t = 0.0;
  double eps = 0.0;
  double D = 0.0;
  double M = 0.0;  // total mass when the state was created
};

SimState make_state(std::shared_ptr<const GridSpec> grid, double eps, double D,
                    std::vector<double> u, std::vector<double> v);

/// Midpoint-rule sum of (u + v) times the cell measure, compensated.
double total_mass(const SimState& s);

/// Compensated sum of a field over the masked cells (no cell measure).
double masked_sum(const GridSpec& g, const std::vector<double>& x);

double max_abs_fu(const Kinetics& k, const SimState& s);

/// 0.5 * (0.5 eps / max|f_u|): half of the explicit-reaction bound.
double stable_dt(const Kinetics& k, const SimState& s);

/// First-order IMEX stepper. The reaction r = f(u^n, v^n) is added to u and
/// subtracted from v; diffusion is implicit through two Helmholtz solves.
/// Afterwards each field is shifted uniformly so its sum equals the exact
/// target (old sum plus or minus the summed reaction), which removes the
/// solver residual from the mass balance.
class Integrator {
 public:
  Integrator(const Kinetics& k, std::shared_ptr<const GridSpec> grid, double eps, double D,
             double dt, double rel_tol = 1e-10);

  /// Throws StabilityBoundViolated if dt exceeds 0.5 eps / max|f_u| for the
  /// incoming state, SolverDivergence if a solve fails.
  void step(SimState& s) const;

  double dt() const { return dt_; }
  /// Pure diffusion mode (f forced to zero) for testing.
  void set_reaction(bool on) { reaction_ = on; }
  int last_iterations_u() const { return it_u_; }
  int last_iterations_v() const { return it_v_; }

 private:
  Kinetics k_;
  std::shared_ptr<const GridSpec> grid_;
  double eps_, D_, dt_, tol_;
  HelmholtzSolver hu_;
  HelmholtzSolver hv_;
  bool reaction_ = true;
  mutable std::vector<double> r_, bu_, bv_, gu_, gv_, prev_u_, prev_v_;
  mutable bool have_prev_ = false;
  mutable const double* last_u_ = nullptr;
  mutable int it_u_ = 0, it_v_ = 0;
};

/// Convenience single step (builds the solvers on every call).
SimState step(const Kinetics& k, const SimState& s, double dt);

struct Diagnostics {
  double t = 0.0;
  double M = 0.0;
  double v_mean = 0.0;
  double level = 0.0;      // u_m(v_mean), NaN outside the bistable range
  double area_plus = 0.0;  // |{u > level}|; 1D: its length
  double length = 0.0;     // total interface length (1D: number of crossings)
  double cx = 0.0;         // centroid of {u > level}
  double cy = 0.0;
  double s_estimate = 0.0;  // boundary parameter of the largest attached droplet, NaN if none
  std::size_t curves = 0;
  bool v_in_range = true;  // every cell's v inside the bistable range
};

/// Contour-based measurements at level u_m(v_mean).
Diagnostics diagnose(const Kinetics& k, const SimState& s);

/// Interface curves at the diagnostic level (empty outside the bistable range).
FieldContour interface_contour(const Kinetics& k, const SimState& s);

struct RunOptions {
  double t_end = 1.0;
  double dt = 0.0;              // <= 0: stable_dt of the initial state
  double output_every = 0.1;    // time between diagnostics rows
  double snapshot_every = 0.0;  // <= 0: no snapshots
  double rel_tol = 1e-10;
};

struct RunResult {
  std::vector<Diagnostics> series;
  SimState final_state;
  std::size_t steps = 0;
  std::size_t range_events = 0;  // diagnostics rows with v outside the bistable range
  double dt = 0.0;
};

/// Fixed-step run to t_end. Diagnostics at t = 0 and every output_every
/// (rounded to whole steps); on_snapshot receives the state at t = 0 and every
/// snapshot_every.
RunResult run(const Kinetics& k, SimState init, const RunOptions& opt,
              const std::function<void(const SimState&)>& on_snapshot = {});

}  // namespace wavepin
