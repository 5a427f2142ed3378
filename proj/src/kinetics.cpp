#include "wavepin/kinetics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <regex>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "wavepin/errors.hpp"

namespace wavepin {

std::string to_string(KineticsForm form) {
  switch (form) {
    case KineticsForm::CubicSymmetric:
      return "cubic";
    case KineticsForm::MoriSaturating:
      return "mori";
    case KineticsForm::Custom:
      return "custom";
  }
  return "unknown";
}

Kinetics Kinetics::cubic_symmetric() {
  Kinetics k;
  k.form_ = KineticsForm::CubicSymmetric;
  k.name_ = "cubic";
  k.u_search_ = {-2.0, 2.0};
  const double fold = 2.0 / (3.0 * std::sqrt(3.0));
  k.v_scan_ = {-1.0, 1.0};
  k.bistable_ = {-fold, fold};
  return k;
}

Kinetics Kinetics::mori_saturating(double k0, double gamma, Interval v_scan,
                                   Interval u_search) {
  Kinetics k;
  k.form_ = KineticsForm::MoriSaturating;
  k.name_ = "mori";
  k.params_ = {{"k0", k0}, {"gamma", gamma}};
  k.k0_ = k0;
  k.gamma_ = gamma;
  k.u_search_ = u_search;
  k.v_scan_ = v_scan;
  k.detect_bistable_range();
  return k;
}

Kinetics Kinetics::custom(Function f, Interval u_search, Interval v_scan,
                          std::string name) {
  Kinetics k;
  k.form_ = KineticsForm::Custom;
  k.name_ = std::move(name);
  k.custom_ = std::move(f);
  k.u_search_ = u_search;
  k.v_scan_ = v_scan;
  k.detect_bistable_range();
  return k;
}

Kinetics Kinetics::from_params(const std::string& form,
                               const std::map<std::string, double>& params) {
  auto take = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
      (void)value;
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw ConfigError("unknown kinetics parameter '" + key + "'");
    }
  };

  if (form == "cubic" || form == "cubic_symmetric" || form == "CubicSymmetric") {
    reject_unknown({});
    return cubic_symmetric();
  }
  if (form == "mori" || form == "mori_saturating" || form == "MoriSaturating") {
    reject_unknown({"k0", "gamma", "u_lo", "u_hi", "v_lo", "v_hi"});
    return mori_saturating(take("k0", 0.067), take("gamma", 1.0),
                           {take("v_lo", 0.0), take("v_hi", 4.0)},
                           {take("u_lo", 0.0), take("u_hi", 6.0)});
  }
  if (form == "polynomial" || form == "custom" || form == "Custom") {
    static const std::regex term(R"(u(\d+)v(\d+))");
    std::vector<std::array<double, 3>> terms;  // {coef, i, j}
    for (const auto& [key, value] : params) {
      std::smatch m;
      if (std::regex_match(key, m, term)) {
        terms.push_back({value, std::stod(m[1]), std::stod(m[2])});
      } else if (key != "u_lo" && key != "u_hi" && key != "v_lo" && key != "v_hi") {
        throw ConfigError("unknown polynomial kinetics key '" + key + "'");
      }
    }
    if (terms.empty()) throw ConfigError("polynomial kinetics needs u<i>v<j> terms");
    auto fn = [terms](double u, double v) {
      double s = 0.0;
      for (const auto& t : terms) s += t[0] * std::pow(u, t[1]) * std::pow(v, t[2]);
      return s;
    };
    Kinetics k = custom(fn, {take("u_lo", -3.0), take("u_hi", 3.0)},
                        {take("v_lo", -2.0), take("v_hi", 2.0)}, "polynomial");
    k.params_ = params;
    return k;
  }
  throw ConfigError("unknown kinetics form '" + form + "'");
}

double Kinetics::f(double u, double v) const {
  switch (form_) {
    case KineticsForm::CubicSymmetric:
      return -u * u * u + u + v;
    case KineticsForm::MoriSaturating: {
      const double u2 = u * u;
      return v * (k0_ + gamma_ * u2 / (1.0 + u2)) - u;
    }
    case KineticsForm::Custom:
      return custom_(u, v);
  }
  return 0.0;
}

ReactionValue Kinetics::eval(double u, double v) const {
  switch (form_) {
    case KineticsForm::CubicSymmetric:
      return {-u * u * u + u + v, 1.0 - 3.0 * u * u, 1.0};
    case KineticsForm::MoriSaturating: {
      const double k0 = k0_;
      const double gamma = gamma_;
      const double u2 = u * u;
      const double sat = gamma * u2 / (1.0 + u2);
      const double dsat = gamma * 2.0 * u / ((1.0 + u2) * (1.0 + u2));
      return {v * (k0 + sat) - u, v * dsat - 1.0, k0 + sat};
    }
    case KineticsForm::Custom: {
      const double hu = 1e-6 * std::max(1.0, std::abs(u));
      const double hv = 1e-6 * std::max(1.0, std::abs(v));
      return {custom_(u, v), (custom_(u + hu, v) - custom_(u - hu, v)) / (2 * hu),
              (custom_(u, v + hv) - custom_(u, v - hv)) / (2 * hv)};
    }
  }
  return {};
}

int Kinetics::count_sign_changes(double v, std::size_t grid) const {
  int count = 0;
  const double du = u_search_.width() / static_cast<double>(grid - 1);
  bool prev = f(u_search_.lo, v) >= 0.0;
  for (std::size_t i = 1; i < grid; ++i) {
    const bool cur = f(u_search_.lo + du * static_cast<double>(i), v) >= 0.0;
    if (cur != prev) ++count;
    prev = cur;
  }
  return count;
}

void Kinetics::detect_bistable_range() {
  constexpr int kScan = 512;
  const double dv = v_scan_.width() / (kScan - 1);
  int first = -1;
  int last = -1;
  for (int i = 0; i < kScan; ++i) {
    const bool three = count_sign_changes(v_scan_.lo + dv * i) == 3;
    if (three && first < 0) first = i;
    if (three && first >= 0) last = i;
    if (!three && first >= 0) break;
  }
  if (first < 0) {
    bistable_ = {0.0, 0.0};
    return;
  }
  auto bisect_edge = [&](double inside, double outside) {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (count_sign_changes(mid) == 3) inside = mid; else outside = mid;
    }
    return inside;
  };
  const double lo = first == 0 ? v_scan_.lo
                               : bisect_edge(v_scan_.lo + dv * first,
                                             v_scan_.lo + dv * (first - 1));
  const double hi = last == kScan - 1 ? v_scan_.hi
                                      : bisect_edge(v_scan_.lo + dv * last,
                                                    v_scan_.lo + dv * (last + 1));
  bistable_ = {lo, hi};
}

ReactionValue eval_f(const Kinetics& k, double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v)) {
    throw NonFiniteInput("eval_f(" + std::to_string(u) + ", " + std::to_string(v) + ")");
  }
  return k.eval(u, v);
}

namespace {

// Bracketed Newton: bisection whenever the Newton iterate leaves [a, b].
double refine_root(const Kinetics& k, double v, double a, double b) {
  double fa = k.f(a, v);
  if (fa == 0.0) return a;
  if (k.f(b, v) == 0.0) return b;
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const ReactionValue r = k.eval(x, v);
    if (r.f == 0.0) return x;
    if ((r.f < 0.0) == (fa < 0.0)) {
      a = x;
      fa = r.f;
    } else {
      b = x;
    }
    double next = (r.f_u != 0.0) ? x - r.f / r.f_u : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      break;
    }
  }
  return x;
}

std::vector<double> scan_roots(const Kinetics& k, double v, std::size_t grid) {
  const Interval us = k.u_search();
  const double du = us.width() / static_cast<double>(grid - 1);
  std::vector<double> roots;
  double u_prev = us.lo;
  double f_prev = k.f(u_prev, v);
  for (std::size_t i = 1; i < grid; ++i) {
    const double u = us.lo + du * static_cast<double>(i);
    const double fu = k.f(u, v);
    if ((fu >= 0.0) != (f_prev >= 0.0)) roots.push_back(refine_root(k, v, u_prev, u));
    u_prev = u;
    f_prev = fu;
  }
  return roots;
}

EquilibriumBranches assemble(const Kinetics& k, double v, double um, double u0,
                             double up) {
  EquilibriumBranches b;
  b.v = v;
  b.u_minus = um;
  b.u_mid = u0;
  b.u_plus = up;
  const ReactionValue rm = k.eval(um, v);
  const ReactionValue rp = k.eval(up, v);
  b.du_minus = -rm.f_v / rm.f_u;
  b.du_plus = -rp.f_v / rp.f_u;
  return b;
}

}  // namespace

EquilibriumBranches branch_roots(const Kinetics& k, double v) {
  if (!std::isfinite(v)) throw NonFiniteInput("branch_roots v");
  const Interval range = k.bistable_range();
  if (range.empty() || !range.contains(v)) {
    throw OutsideBistableRange("v = " + std::to_string(v) + " not in [" +
                               std::to_string(range.lo) + ", " +
                               std::to_string(range.hi) + "]");
  }
  auto roots = scan_roots(k, v, Kinetics::kRootGrid);
  if (roots.size() != 3) roots = scan_roots(k, v, 16 * Kinetics::kRootGrid);
  if (roots.size() != 3) {
    throw OutsideBistableRange("f(., " + std::to_string(v) + ") has " +
                               std::to_string(roots.size()) + " roots");
  }
  return assemble(k, v, roots[0], roots[1], roots[2]);
}

EquilibriumBranches branch_roots(const Kinetics& k, double v,
                                 const EquilibriumBranches& hint) {
  if (!std::isfinite(v)) throw NonFiniteInput("branch_roots v");
  const Interval range = k.bistable_range();
  if (range.empty() || !range.contains(v)) return branch_roots(k, v);
  std::array<double, 3> r{hint.u_minus, hint.u_mid, hint.u_plus};
  bool ok = true;
  for (double& x : r) {
    bool converged = false;
    for (int it = 0; it < 12; ++it) {
      const ReactionValue e = k.eval(x, v);
      if (e.f_u == 0.0) break;
      const double step = e.f / e.f_u;
      x -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) {
        converged = true;
        break;
      }
    }
    ok = ok && converged && std::abs(k.f(x, v)) <= 1e-12;
  }
  if (ok && r[0] < r[1] && r[1] < r[2] && k.eval(r[0], v).f_u < 0.0 &&
      k.eval(r[1], v).f_u > 0.0 && k.eval(r[2], v).f_u < 0.0) {
    return assemble(k, v, r[0], r[1], r[2]);
  }
  return branch_roots(k, v);
}

double integral_I(const Kinetics& k, double v) {
  const EquilibriumBranches b = branch_roots(k, v);
  auto integrand = [&](double u) { return k.f(u, v); };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, b.u_minus, b.u_plus, 15, 1e-14, &err);
  return value;
}

namespace {

// Interior of the bistable range, kept away from the folds where the outer
// and middle roots coalesce.
Interval interior(const Interval& r) {
  const double pad = 1e-6 * r.width();
  return {r.lo + pad, r.hi - pad};
}

}  // namespace

CriticalValue find_vc(const Kinetics& k) {
  if (!k.is_bistable()) throw NoSignChange("kinetics has no bistable range");
  const Interval range = interior(k.bistable_range());
  constexpr int kSamples = 64;
  const double dv = range.width() / (kSamples - 1);
  double a = range.lo;
  double Ia = integral_I(k, a);
  std::optional<std::pair<double, double>> bracket;
  for (int i = 1; i < kSamples; ++i) {
    const double b = range.lo + dv * i;
    const double Ib = integral_I(k, b);
    if (Ia == 0.0) {
      bracket = {a, a};
      break;
    }
    if ((Ia < 0.0) != (Ib < 0.0)) {
      bracket = {a, b};
      break;
    }
    a = b;
    Ia = Ib;
  }
  if (!bracket) throw NoSignChange("I(v) keeps one sign on the bistable range");

  double vc = bracket->first;
  if (bracket->second != bracket->first) {
    boost::uintmax_t max_iter = 200;
    auto I = [&](double v) { return integral_I(k, v); };
    auto res = boost::math::tools::toms748_solve(
        I, bracket->first, bracket->second, boost::math::tools::eps_tolerance<double>(52),
        max_iter);
    vc = 0.5 * (res.first + res.second);
    if (std::abs(integral_I(k, res.first)) < std::abs(integral_I(k, vc))) vc = res.first;
    if (std::abs(integral_I(k, res.second)) < std::abs(integral_I(k, vc))) vc = res.second;
  }
  const double h = 1e-5 * k.bistable_range().width();
  const double dI = (integral_I(k, vc + h) - integral_I(k, vc - h)) / (2 * h);
  return {vc, dI};
}

bool ConditionReport::all_pass() const {
  if (samples.empty() || !vc_found || !vc_unique || !dI_positive) return false;
  return std::all_of(samples.begin(), samples.end(), [](const ConditionSample& s) {
    return s.three_roots && s.fu_signs && s.homogeneous && s.lambda_positive &&
           s.velocity_sign;
  });
}

std::string ConditionReport::summary() const {
  std::ostringstream os;
  std::size_t n3 = 0, nfu = 0, nh = 0, nl = 0, nv = 0;
  for (const auto& s : samples) {
    n3 += s.three_roots;
    nfu += s.fu_signs;
    nh += s.homogeneous;
    nl += s.lambda_positive;
    nv += s.velocity_sign;
  }
  const std::size_t n = samples.size();
  os << "range=[" << range.lo << ", " << range.hi << "] samples=" << n
     << " three_roots=" << n3 << "/" << n << " fu_signs=" << nfu << "/" << n
     << " homogeneous=" << nh << "/" << n << " lambda=" << nl << "/" << n
     << " velocity_sign=" << nv << "/" << n << " vc=" << (vc_found ? vc : NAN)
     << " unique=" << vc_unique << " dI=" << dI;
  return os.str();
}

ConditionReport validate_conditions(const Kinetics& k, std::size_t samples) {
  samples = std::max<std::size_t>(samples, 3);
  ConditionReport report;
  report.range = k.bistable_range();
  const Interval span = k.is_bistable() ? interior(k.bistable_range()) : k.v_scan();

  if (k.is_bistable()) {
    try {
      const CriticalValue cv = find_vc(k);
      report.vc_found = true;
      report.vc = cv.vc;
      report.dI = cv.dI;
      report.dI_positive = cv.dI > 0.0;
      // uniqueness on the sampled grid
      const std::size_t n = std::max<std::size_t>(samples, 64);
      int changes = 0;
      bool prev = integral_I(k, span.lo) >= 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double v = span.lo + span.width() * static_cast<double>(i) / (n - 1);
        const bool cur = integral_I(k, v) >= 0.0;
        if (cur != prev) ++changes;
        prev = cur;
      }
      report.vc_unique = changes == 1;
    } catch (const NoSignChange&) {
      report.vc_found = false;
    }
  }

  for (std::size_t i = 0; i < samples; ++i) {
    ConditionSample s;
    s.v = span.lo + span.width() * (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
    try {
      const EquilibriumBranches b = branch_roots(k, s.v);
      s.three_roots = true;
      const ReactionValue rm = k.eval(b.u_minus, s.v);
      const ReactionValue r0 = k.eval(b.u_mid, s.v);
      const ReactionValue rp = k.eval(b.u_plus, s.v);
      s.fu_signs = rm.f_u < 0.0 && rp.f_u < 0.0 && r0.f_u > 0.0;
      s.homogeneous = rm.f_u - rm.f_v < 0.0 && rp.f_u - rp.f_v < 0.0;
      s.lambda_positive = 1.0 + b.du_minus > 0.0 && 1.0 + b.du_plus > 0.0;
      if (report.vc_found) {
        const double I = integral_I(k, s.v);
        const double dv = s.v - report.vc;
        s.velocity_sign = std::abs(dv) < 1e-9 || (I > 0.0) == (dv > 0.0);
      }
    } catch (const OutsideBistableRange&) {
      s.three_roots = false;
    }
    report.samples.push_back(s);
  }
  return report;
}

}  // namespace wavepin
