#include "wavepin/pde2d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavepin/errors.hpp"

namespace wavepin {

namespace {

// Neumaier compensated summation.
struct Accumulator {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

void shift_to_sum(const GridSpec& g, std::vector<double>& x, double target) {
  const double shift = (target - masked_sum(g, x)) / static_cast<double>(g.count_inside());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.mask[k]) x[k] += shift;
  }
}

}  // namespace

double masked_sum(const GridSpec& g, const std::vector<double>& x) {
  Accumulator a;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.mask[k]) a.add(x[k]);
  }
  return a.value();
}

SimState make_state(std::shared_ptr<const GridSpec> grid, double eps, double D,
                    std::vector<double> u, std::vector<double> v) {
  if (!(eps > 0.0) || !(D > 0.0)) throw std::invalid_argument("eps and D must be positive");
  if (u.size() != grid->size() || v.size() != grid->size()) {
    throw std::invalid_argument("field size does not match the grid");
  }
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (!grid->mask[k]) {
      u[k] = 0.0;
      v[k] = 0.0;
    } else if (!std::isfinite(u[k]) || !std::isfinite(v[k])) {
      throw NonFiniteInput("initial field is not finite");
    }
  }
  SimState s;
  s.grid = std::move(grid);
  s.u = std::move(u);
  s.v = std::move(v);
  s.eps = eps;
  s.D = D;
  s.M = total_mass(s);
  return s;
}

double total_mass(const SimState& s) {
  const GridSpec& g = *s.grid;
  Accumulator a;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.mask[k]) continue;
    a.add(s.u[k]);
    a.add(s.v[k]);
  }
  return a.value() * g.cell_measure();
}

double max_abs_fu(const Kinetics& k, const SimState& s) {
  const GridSpec& g = *s.grid;
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.mask[i]) m = std::max(m, std::abs(k.eval(s.u[i], s.v[i]).f_u));
  }
  return m;
}

double stable_dt(const Kinetics& k, const SimState& s) {
  const double m = std::max(max_abs_fu(k, s), 1e-12);
  return 0.5 * (0.5 * s.eps / m);
}

Integrator::Integrator(const Kinetics& k, std::shared_ptr<const GridSpec> grid, double eps,
                       double D, double dt, double rel_tol)
    : k_(k),
      grid_(std::move(grid)),
      eps_(eps),
      D_(D),
      dt_(dt),
      tol_(rel_tol),
      hu_(*grid_, dt * eps / (grid_->h * grid_->h)),
      hv_(*grid_, dt * D / (eps * grid_->h * grid_->h)) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  r_.assign(grid_->size(), 0.0);
}

void Integrator::step(SimState& s) const {
  const GridSpec& g = *grid_;
  const double a = dt_ / eps_;
  double fu_max = 0.0;
  Accumulator reaction;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.mask[k]) {
      r_[k] = 0.0;
      continue;
    }
    if (reaction_) {
      const ReactionValue rv = k_.eval(s.u[k], s.v[k]);
      fu_max = std::max(fu_max, std::abs(rv.f_u));
      r_[k] = a * rv.f;
    } else {
      r_[k] = 0.0;
    }
    reaction.add(r_[k]);
  }
  if (dt_ * fu_max > 0.5 * eps_) {
    throw StabilityBoundViolated("dt = " + std::to_string(dt_) + " exceeds 0.5 eps / max|f_u| = " +
                                 std::to_string(0.5 * eps_ / fu_max));
  }
  const double dr = reaction.value();
  const double target_u = masked_sum(g, s.u) + dr;
  const double target_v = masked_sum(g, s.v) - dr;
  bu_.resize(g.size());
  bv_.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    bu_[k] = s.u[k] + r_[k];
    bv_[k] = s.v[k] - r_[k];
  }
  // initial guesses extrapolated linearly from the last two steps
  // only when this is the state the previous call produced; a wrong guess
  // would cost iterations, not accuracy
  const bool extrap = have_prev_ && s.u.data() == last_u_ && prev_u_.size() == g.size();
  gu_ = s.u;
  gv_ = s.v;
  if (extrap) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      gu_[k] = 2.0 * s.u[k] - prev_u_[k];
      gv_[k] = 2.0 * s.v[k] - prev_v_[k];
    }
  }
  prev_u_ = s.u;
  prev_v_ = s.v;
  have_prev_ = true;
  it_u_ = hu_.solve(bu_, gu_, tol_);
  it_v_ = hv_.solve(bv_, gv_, tol_);
  s.u.swap(gu_);
  s.v.swap(gv_);
  shift_to_sum(g, s.u, target_u);
  shift_to_sum(g, s.v, target_v);
  s.t += dt_;
  last_u_ = s.u.data();
}

SimState step(const Kinetics& k, const SimState& s, double dt) {
  SimState out = s;
  Integrator(k, s.grid, s.eps, s.D, dt).step(out);
  return out;
}

FieldContour interface_contour(const Kinetics& k, const SimState& s) {
  const Diagnostics d = diagnose(k, s);
  if (!std::isfinite(d.level)) return {};
  return extract_contour(s.u, d.level, *s.grid);
}

Diagnostics diagnose(const Kinetics& k, const SimState& s) {
  const GridSpec& g = *s.grid;
  Diagnostics d;
  d.t = s.t;
  d.M = total_mass(s);
  d.v_mean = masked_sum(g, s.v) / static_cast<double>(g.count_inside());
  const Interval range = k.bistable_range();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.mask[i] && !range.contains(s.v[i])) {
      d.v_in_range = false;
      break;
    }
  }
  d.level = range.contains(d.v_mean) ? branch_roots(k, d.v_mean).u_mid : NAN;
  d.s_estimate = NAN;
  if (!std::isfinite(d.level)) {
    d.area_plus = d.length = d.cx = d.cy = NAN;
    return d;
  }

  // cell-indicator measure and centroid of {u > level}
  double cells = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t q = g.idx(i, j);
      if (g.mask[q] && s.u[q] > d.level) {
        const Vec2 c = g.center(i, j);
        cells += 1.0;
        sx += c.x;
        sy += c.y;
      }
    }
  }
  d.cx = cells > 0.0 ? sx / cells : NAN;
  d.cy = cells > 0.0 ? sy / cells : NAN;

  if (g.one_d()) {
    const auto xs = level_crossings_1d(s.u, d.level, g);
    const double x0 = g.origin.x, x1 = g.origin.x + g.h * static_cast<double>(g.nx);
    bool high = s.u[0] > d.level;
    double from = x0, len = 0.0, mom = 0.0;
    for (double x : xs) {
      if (high) {
        len += x - from;
        mom += 0.5 * (x * x - from * from);
      }
      high = !high;
      from = x;
    }
    if (high) {
      len += x1 - from;
      mom += 0.5 * (x1 * x1 - from * from);
    }
    d.area_plus = len;
    d.length = static_cast<double>(xs.size());
    d.curves = xs.size();
    d.cx = len > 0.0 ? mom / len : NAN;
    d.cy = g.origin.y + 0.5 * g.h;
    return d;
  }

  const FieldContour fc = extract_contour(s.u, d.level, g);
  const DomainBoundary& b = *g.domain;
  d.curves = fc.curves.size();
  double signed_area = 0.0, length = 0.0, best = -1.0;
  for (const InterfaceCurve& c : fc.curves) {
    if (c.size() < 2) continue;
    const double a = polygon_area(c, b);
    signed_area += a;
    length += polygon_length(c);
    if (!c.closed() && std::abs(a) > best) {
      best = std::abs(a);
      d.s_estimate = attached_midpoint(c, b);
    }
  }
  // holes come back with negative area; the cell count tells whether the
  // background outside every curve is high
  const double cell_area = cells * g.cell_measure();
  const double with_bg = signed_area + b.area();
  d.area_plus = std::abs(with_bg - cell_area) < std::abs(signed_area - cell_area) ? with_bg : signed_area;
  d.length = length;
  return d;
}

RunResult run(const Kinetics& k, SimState init, const RunOptions& opt,
              const std::function<void(const SimState&)>& on_snapshot) {
  if (!(opt.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  RunResult res;
  const double dt = opt.dt > 0.0 ? opt.dt : stable_dt(k, init);
  res.dt = dt;
  const auto steps = static_cast<std::size_t>(std::llround(opt.t_end / dt));
  const std::size_t out_stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.output_every / dt)));
  const std::size_t snap_stride =
      opt.snapshot_every > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.snapshot_every / dt)))
          : 0;
  const Integrator integ(k, init.grid, init.eps, init.D, dt, opt.rel_tol);
  SimState s = std::move(init);
  const double t0 = s.t;
  auto record = [&]() {
    res.series.push_back(diagnose(k, s));
    if (!res.series.back().v_in_range) ++res.range_events;
  };
  record();
  if (snap_stride && on_snapshot) on_snapshot(s);
  for (std::size_t n = 1; n <= steps; ++n) {
    integ.step(s);
    s.t = t0 + static_cast<double>(n) * dt;  // no drift from repeated addition
    if (n % out_stride == 0 || n == steps) record();
    if (snap_stride && on_snapshot && (n % snap_stride == 0 || n == steps)) on_snapshot(s);
  }
  res.steps = steps;
  res.final_state = std::move(s);
  return res;
}

}  // namespace wavepin
