#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace wavepin {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const { const double n = norm(); return {x / n, y / n}; }
  Vec2 left() const { return {-y, x}; }   // rotated +90 degrees
  Vec2 right() const { return {y, -x}; }  // rotated -90 degrees
};

inline Vec2 operator*(double a, Vec2 v) { return v * a; }

enum class BoundaryKind { Circle, Ellipse, Rectangle, SampledClosedCurve };

std::string to_string(BoundaryKind kind);

struct BoundaryCurvature {
  double K = 0.0;
  double K_s = 0.0;
  double K_ss = 0.0;
};

/// Closed counterclockwise domain boundary parametrized by arclength s in
/// [0, L). The outward normal nu is the right-hand normal of the tangent.
///
/// Ellipse: s = 0 at the positive major tip (a, 0). Rectangle: s = 0 at the
/// lower-left corner. Sampled curves: s = 0 at the first sample.
class DomainBoundary {
 public:
  static DomainBoundary circle(double r, Vec2 center = {});
  static DomainBoundary ellipse(double a, double b, Vec2 center = {});
  static DomainBoundary rectangle(double x0, double y0, double x1, double y1);
  /// Periodic-spline smoothed closed polygon; orientation is made CCW.
  static DomainBoundary sampled(const std::vector<Vec2>& points);

  BoundaryKind kind() const { return kind_; }
  double total_length() const { return length_; }
  double area() const { return area_; }
  /// Circle: {r}; Ellipse: {a, b}; Rectangle: {x0, y0, x1, y1}.
  const std::vector<double>& shape_params() const { return params_; }
  Vec2 center() const { return center_; }

  double wrap(double s) const;
  /// Signed shortest parameter difference b - a on the periodic boundary.
  double param_diff(double a, double b) const;

  Vec2 point(double s) const;
  Vec2 tangent(double s) const;
  Vec2 outward_normal(double s) const { return tangent(s).right(); }
  BoundaryCurvature curvature(double s) const;

  /// Nearest boundary parameter. `hint` (if finite) restricts Newton to start
  /// from that parameter, which keeps repeated projections of slowly moving
  /// points cheap.
  double project(Vec2 p, double hint = NAN) const;
  double distance(Vec2 p) const;
  bool inside(Vec2 p) const;

  void bounding_box(Vec2& lo, Vec2& hi) const;

 private:
  DomainBoundary() = default;
  double theta_of_s(double s) const;  // ellipse / sampled parameter
  void build_table();

  BoundaryKind kind_ = BoundaryKind::Circle;
  std::vector<double> params_;
  Vec2 center_;
  double length_ = 0.0;
  double area_ = 0.0;
  // arclength table over the native parameter (ellipse angle, spline chord
  // parameter) with uniform parameter steps
  std::vector<double> s_table_;
  double param_period_ = 0.0;
  // sampled boundary: x(t), y(t) splines and curvature spline K(s)
  struct SampledData;
  std::shared_ptr<const SampledData> sampled_;
  std::vector<Vec2> coarse_;  // dense polyline for seeding projections
  std::vector<double> coarse_s_;
};

/// Analytic ellipse quantities in terms of the angle parameter theta, used by
/// the tests as independent oracles.
BoundaryCurvature ellipse_curvature_at_angle(double a, double b, double theta);

enum class Topology { Closed, Attached };

/// Marker-point interface. Closed curves are stored without repeating the
/// first point. Attached curves run from the boundary point at s_start to the
/// one at s_end; Omega_+ lies on the left of the direction of travel, so
/// the region is closed by walking the boundary counterclockwise from s_end
/// back to s_start. n points from Omega_+ into Omega_- (right-hand normal).
struct InterfaceCurve {
  std::vector<Vec2> points;
  Topology topology = Topology::Closed;
  double s_start = 0.0;
  double s_end = 0.0;

  std::size_t size() const { return points.size(); }
  bool closed() const { return topology == Topology::Closed; }
};

InterfaceCurve make_closed_curve(std::vector<Vec2> pts);
InterfaceCurve circle_curve(Vec2 center, double r, std::size_t n);
InterfaceCurve ellipse_curve(Vec2 center, double a, double b, std::size_t n, double rotation = 0.0);

/// Segment lengths; closed curves include the closing segment.
std::vector<double> segment_lengths(const InterfaceCurve& c);
double curve_length(const InterfaceCurve& c);

/// Signed curvature per node (convex closed CCW curve: kappa > 0). Attached
/// curves need the boundary: end nodes are continued by reflection across the
/// boundary tangent line before the spline fit.
std::vector<double> curvature(const InterfaceCurve& c, const DomainBoundary* b = nullptr);

/// Outward (Omega_+ to Omega_-) unit normal per node, from the same spline.
std::vector<Vec2> normals(const InterfaceCurve& c, const DomainBoundary* b = nullptr);

/// n nodes at equal spline arclength. Attached curves keep their end nodes and
/// use the mirrored ends of the curvature fit when b is given.
InterfaceCurve redistribute(const InterfaceCurve& c, std::size_t n, const DomainBoundary* b = nullptr);

/// Trapezoidal arclength-weighted mean.
double mean_over_curve(const InterfaceCurve& c, const std::vector<double>& q);

/// |Omega_+|. Closed: shoelace. Attached: shoelace of the curve plus the
/// boundary arc from s_end counterclockwise to s_start.
double enclosed_area(const InterfaceCurve& c, const DomainBoundary& b);

/// 0.5 * integral of X x dX along the boundary, counterclockwise from s_from
/// over arclength span >= 0 (exact for the analytic kinds).
double boundary_sector(const DomainBoundary& b, double s_from, double span);

/// Centroid of Omega_+ (same closure as enclosed_area).
Vec2 enclosed_centroid(const InterfaceCurve& c, const DomainBoundary& b);

inline BoundaryCurvature boundary_curvature(const DomainBoundary& b, double s) {
  return b.curvature(s);
}

/// Boundary parameter halfway between the endpoints of an attached curve.
double attached_midpoint(const InterfaceCurve& c, const DomainBoundary& b);

/// True if any two non-adjacent segments intersect (sweep over x-sorted
/// segment boxes).
bool self_intersects(const InterfaceCurve& c);

/// Angle in radians between the end tangent of an attached curve and the
/// boundary tangent at each end; pi/2 means orthogonal contact.
void contact_angles(const InterfaceCurve& c, const DomainBoundary& b, double& start,
                    double& end);

/// Local frame at boundary parameter s: X0, tau, inward normal -nu.
struct BoundaryFrame {
  Vec2 origin;
  Vec2 tau;
  Vec2 inward;
};
BoundaryFrame boundary_frame(const DomainBoundary& b, double s);

struct ArcModes {
  double s = 0.0;
  double R0 = 0.0;
  std::vector<double> R;  // R_2 .. R_N
  double residual = 0.0;
};

/// ln(rho / eps) / eps^2 in the flattened frame at boundary parameter s,
/// least-squares fitted by {1, cos theta, cos 2theta, ..., cos N theta}.
/// s starts at the projection of the chord midpoint and is moved along the
/// boundary until the cos theta coefficient (a pure shift) vanishes.
ArcModes fit_arc_modes(const InterfaceCurve& c, const DomainBoundary& b, double eps,
                       std::size_t N);

/// Inverse of fit_arc_modes: rho(theta) = eps exp(eps^2 (R0 + sum R_n cos n theta))
/// in the flattened frame at s, sampled at n_nodes equal angles between the
/// two angles where it meets the boundary (near 0 and near pi).
InterfaceCurve synthesize_arc(const DomainBoundary& b, double s, double eps, double R0,
                              const std::vector<double>& R, std::size_t n_nodes);

}  // namespace wavepin
