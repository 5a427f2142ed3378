#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wavepin {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
  bool empty() const { return !(hi > lo); }
};

enum class KineticsForm { CubicSymmetric, MoriSaturating, Custom };

std::string to_string(KineticsForm form);

/// f together with both partial derivatives.
struct ReactionValue {
  double f = 0.0;
  double f_u = 0.0;
  double f_v = 0.0;
};

/// Bistable reaction term f(u, v) of the wave-pinning system.
///
/// Built-in forms carry analytic partials. Custom forms are evaluated through
/// a user callback and differentiated by central differences. The bistable
/// range is analytic for CubicSymmetric and detected numerically otherwise
/// (scan in v, count sign changes of f(., v) on a fixed u grid, bisect on the
/// fold points).
class Kinetics {
 public:
  using Function = std::function<double(double u, double v)>;

  /// f(u, v) = -u^3 + u + v.
  static Kinetics cubic_symmetric();

  /// f(u, v) = v (k0 + gamma u^2 / (1 + u^2)) - u.
  static Kinetics mori_saturating(double k0, double gamma,
                                  Interval v_scan = {0.0, 4.0},
                                  Interval u_search = {0.0, 6.0});

  static Kinetics custom(Function f, Interval u_search, Interval v_scan,
                         std::string name = "custom");

  /// Construct from a form name and a coefficient map (run configuration).
  /// Forms: "cubic", "mori" (k0, gamma), "polynomial" (coefficients keyed
  /// "u<i>v<j>" for u^i v^j, plus optional u_lo/u_hi/v_lo/v_hi search
  /// windows).
  static Kinetics from_params(const std::string& form,
                              const std::map<std::string, double>& params);

  KineticsForm form() const { return form_; }
  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }

  /// Empty interval when f(., v) is nowhere bistable on the scan window.
  Interval bistable_range() const { return bistable_; }
  bool is_bistable() const { return !bistable_.empty(); }
  Interval u_search() const { return u_search_; }
  Interval v_scan() const { return v_scan_; }

  double f(double u, double v) const;
  ReactionValue eval(double u, double v) const;

  /// Number of sign changes of f(., v) on the u_search grid used for root
  /// bracketing.
  int count_sign_changes(double v, std::size_t grid = kRootGrid) const;

  static constexpr std::size_t kRootGrid = 2048;

 private:
  Kinetics() = default;
  void detect_bistable_range();

  KineticsForm form_ = KineticsForm::Custom;
  std::string name_;
  std::map<std::string, double> params_;
  Function custom_;
  double k0_ = 0.0;
  double gamma_ = 0.0;
  Interval u_search_;
  Interval v_scan_;
  Interval bistable_;
};

struct EquilibriumBranches {
  double v = 0.0;
  double u_minus = 0.0;
  double u_mid = 0.0;
  double u_plus = 0.0;
  double du_minus = 0.0;  // u_-'(v)
  double du_plus = 0.0;   // u_+'(v)

  double jump() const { return u_plus - u_minus; }
};

ReactionValue eval_f(const Kinetics& k, double u, double v);

/// Three roots of f(., v) by bracketing scan plus safeguarded Newton.
EquilibriumBranches branch_roots(const Kinetics& k, double v);

/// Same contract, but first tries to polish the roots of a nearby v given in
/// `hint`; falls back to the full scan when polishing fails.
EquilibriumBranches branch_roots(const Kinetics& k, double v,
                                 const EquilibriumBranches& hint);

/// I(v) = integral of f(u, v) du over [u_-(v), u_+(v)].
double integral_I(const Kinetics& k, double v);

struct CriticalValue {
  double vc = 0.0;
  double dI = 0.0;  // I'(vc), central difference
};

CriticalValue find_vc(const Kinetics& k);

struct ConditionSample {
  double v = 0.0;
  bool three_roots = false;
  bool fu_signs = false;      // f_u(u_pm) < 0 < f_u(u_m)
  bool homogeneous = false;   // f_u - f_v < 0 at u_pm
  bool lambda_positive = false;  // 1 + u_pm' > 0
  bool velocity_sign = false;    // sign I(v) = sign(v - vc)
};

struct ConditionReport {
  std::vector<ConditionSample> samples;
  bool vc_found = false;
  bool vc_unique = false;
  bool dI_positive = false;
  double vc = 0.0;
  double dI = 0.0;
  Interval range;

  bool all_pass() const;
  std::string summary() const;
};

/// Checks the bistability, homogeneous-stability and velocity-sign
/// conditions on `samples` points of the bistable range. Failures are
/// reported, never thrown.
ConditionReport validate_conditions(const Kinetics& k, std::size_t samples);

}  // namespace wavepin
