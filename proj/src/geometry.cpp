#include "wavepin/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "wavepin/errors.hpp"
#include "wavepin/spline.hpp"

namespace wavepin {

namespace {

constexpr std::size_t kTableIntervals = 4096;
constexpr std::size_t kCoarse = 2048;
using GL = boost::math::quadrature::gauss<double, 10>;

}  // namespace

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::Circle:
      return "circle";
    case BoundaryKind::Ellipse:
      return "ellipse";
    case BoundaryKind::Rectangle:
      return "rectangle";
    case BoundaryKind::SampledClosedCurve:
      return "sampled";
  }
  return "unknown";
}

struct DomainBoundary::SampledData {
  CurveSpline spline;
  CubicSpline K;  // periodic in s
};

// ---------------------------------------------------------------------------
// construction

DomainBoundary DomainBoundary::circle(double r, Vec2 center) {
  if (!(r > 0.0)) throw std::invalid_argument("circle radius must be positive");
  DomainBoundary b;
  b.kind_ = BoundaryKind::Circle;
  b.params_ = {r};
  b.center_ = center;
  b.length_ = 2.0 * M_PI * r;
  b.area_ = M_PI * r * r;
  b.build_table();
  return b;
}

DomainBoundary DomainBoundary::ellipse(double a, double b_, Vec2 center) {
  if (!(a > 0.0 && b_ > 0.0)) throw std::invalid_argument("ellipse semi-axes must be positive");
  DomainBoundary b;
  b.kind_ = BoundaryKind::Ellipse;
  b.params_ = {a, b_};
  b.center_ = center;
  b.area_ = M_PI * a * b_;
  b.param_period_ = 2.0 * M_PI;
  b.build_table();
  return b;
}

DomainBoundary DomainBoundary::rectangle(double x0, double y0, double x1, double y1) {
  if (!(x1 > x0 && y1 > y0)) throw std::invalid_argument("degenerate rectangle");
  DomainBoundary b;
  b.kind_ = BoundaryKind::Rectangle;
  b.params_ = {x0, y0, x1, y1};
  b.center_ = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
  b.length_ = 2.0 * ((x1 - x0) + (y1 - y0));
  b.area_ = (x1 - x0) * (y1 - y0);
  b.build_table();
  return b;
}

DomainBoundary DomainBoundary::sampled(const std::vector<Vec2>& points_in) {
  if (points_in.size() < 8) throw TooFewNodes("sampled boundary needs at least 8 points");
  std::vector<Vec2> pts = points_in;
  double signed_area = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    signed_area += pts[i].cross(pts[(i + 1) % pts.size()]);
  }
  if (signed_area < 0.0) std::reverse(pts.begin(), pts.end());
  if (self_intersects(make_closed_curve(pts))) throw NonSimpleCurve("sampled boundary");

  std::vector<double> x(pts.size()), y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    x[i] = pts[i].x;
    y[i] = pts[i].y;
  }
  DomainBoundary b;
  b.kind_ = BoundaryKind::SampledClosedCurve;
  CurveSpline spl(x, y, true);
  b.param_period_ = spl.length_param();
  b.sampled_ = std::make_shared<SampledData>(SampledData{spl, CubicSpline()});
  b.build_table();

  constexpr std::size_t kK = 1024;
  std::vector<double> s(kK + 1), K(kK + 1);
  for (std::size_t i = 0; i <= kK; ++i) {
    s[i] = b.length_ * static_cast<double>(i) / kK;
    K[i] = spl.curvature(b.theta_of_s(i == kK ? 0.0 : s[i]));
  }
  K[kK] = K[0];
  auto data = std::make_shared<SampledData>(SampledData{spl, CubicSpline(s, K, SplineEnd::Periodic)});
  b.sampled_ = data;
  double cx = 0.0, cy = 0.0, a2 = 0.0;
  for (std::size_t i = 0; i < b.coarse_.size(); ++i) {
    const Vec2 p = b.coarse_[i];
    const Vec2 q = b.coarse_[(i + 1) % b.coarse_.size()];
    const double w = p.cross(q);
    a2 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  b.area_ = 0.5 * a2;
  b.center_ = {cx / (3.0 * a2), cy / (3.0 * a2)};
  return b;
}

void DomainBoundary::build_table() {
  if (kind_ == BoundaryKind::Ellipse || kind_ == BoundaryKind::SampledClosedCurve) {
    auto speed = [this](double t) {
      if (kind_ == BoundaryKind::Ellipse) {
        const double a = params_[0], b = params_[1];
        return std::hypot(a * std::sin(t), b * std::cos(t));
      }
      return std::hypot(sampled_->spline.dx(t), sampled_->spline.dy(t));
    };
    s_table_.assign(kTableIntervals + 1, 0.0);
    const double dt = param_period_ / kTableIntervals;
    for (std::size_t i = 1; i <= kTableIntervals; ++i) {
      s_table_[i] = s_table_[i - 1] + GL::integrate(speed, dt * (i - 1), dt * i);
    }
    length_ = s_table_.back();
  }
  coarse_.resize(kCoarse);
  coarse_s_.resize(kCoarse);
  for (std::size_t i = 0; i < kCoarse; ++i) {
    coarse_s_[i] = length_ * static_cast<double>(i) / kCoarse;
    coarse_[i] = point(coarse_s_[i]);
  }
}

// ---------------------------------------------------------------------------
// evaluation

double DomainBoundary::wrap(double s) const {
  double w = std::fmod(s, length_);
  if (w < 0.0) w += length_;
  if (w >= length_) w -= length_;
  return w;
}

double DomainBoundary::param_diff(double a, double b) const {
  double d = std::fmod(b - a, length_);
  if (d > 0.5 * length_) d -= length_;
  if (d < -0.5 * length_) d += length_;
  return d;
}

double DomainBoundary::theta_of_s(double s) const {
  s = wrap(s);
  const double dt = param_period_ / kTableIntervals;
  auto it = std::upper_bound(s_table_.begin(), s_table_.end(), s);
  std::size_t i = it == s_table_.begin() ? 0 : static_cast<std::size_t>(it - s_table_.begin()) - 1;
  i = std::min(i, kTableIntervals - 1);
  auto speed = [this](double t) {
    if (kind_ == BoundaryKind::Ellipse) {
      const double a = params_[0], b = params_[1];
      return std::hypot(a * std::sin(t), b * std::cos(t));
    }
    return std::hypot(sampled_->spline.dx(t), sampled_->spline.dy(t));
  };
  const double t0 = dt * i;
  double t = t0 + dt * (s - s_table_[i]) / (s_table_[i + 1] - s_table_[i]);
  for (int it2 = 0; it2 < 6; ++it2) {
    const double len = s_table_[i] + GL::integrate(speed, t0, t);
    const double step = (len - s) / speed(t);
    t -= step;
    if (std::abs(step) < 1e-15 * param_period_) break;
  }
  return t;
}

Vec2 DomainBoundary::point(double s) const {
  switch (kind_) {
    case BoundaryKind::Circle: {
      const double r = params_[0];
      const double phi = s / r;
      return {center_.x + r * std::cos(phi), center_.y + r * std::sin(phi)};
    }
    case BoundaryKind::Ellipse: {
      const double t = theta_of_s(s);
      return {center_.x + params_[0] * std::cos(t), center_.y + params_[1] * std::sin(t)};
    }
    case BoundaryKind::Rectangle: {
      const double x0 = params_[0], y0 = params_[1], x1 = params_[2], y1 = params_[3];
      const double w = x1 - x0, h = y1 - y0;
      s = wrap(s);
      if (s < w) return {x0 + s, y0};
      if (s < w + h) return {x1, y0 + (s - w)};
      if (s < 2 * w + h) return {x1 - (s - w - h), y1};
      return {x0, y1 - (s - 2 * w - h)};
    }
    case BoundaryKind::SampledClosedCurve: {
      const double t = theta_of_s(s);
      return {sampled_->spline.x(t), sampled_->spline.y(t)};
    }
  }
  return {};
}

Vec2 DomainBoundary::tangent(double s) const {
  switch (kind_) {
    case BoundaryKind::Circle: {
      const double phi = s / params_[0];
      return {-std::sin(phi), std::cos(phi)};
    }
    case BoundaryKind::Ellipse: {
      const double t = theta_of_s(s);
      return Vec2{-params_[0] * std::sin(t), params_[1] * std::cos(t)}.normalized();
    }
    case BoundaryKind::Rectangle: {
      const double w = params_[2] - params_[0], h = params_[3] - params_[1];
      s = wrap(s);
      if (s < w) return {1, 0};
      if (s < w + h) return {0, 1};
      if (s < 2 * w + h) return {-1, 0};
      return {0, -1};
    }
    case BoundaryKind::SampledClosedCurve: {
      const double t = theta_of_s(s);
      return Vec2{sampled_->spline.dx(t), sampled_->spline.dy(t)}.normalized();
    }
  }
  return {};
}

BoundaryCurvature ellipse_curvature_at_angle(double a, double b, double th) {
  const double q = a * a * std::sin(th) * std::sin(th) + b * b * std::cos(th) * std::cos(th);
  const double qp = (a * a - b * b) * std::sin(2.0 * th);
  const double qpp = 2.0 * (a * a - b * b) * std::cos(2.0 * th);
  BoundaryCurvature k;
  k.K = a * b * std::pow(q, -1.5);
  // d/ds = q^{-1/2} d/dtheta
  k.K_s = -1.5 * a * b * std::pow(q, -3.0) * qp;
  k.K_ss = -1.5 * a * b * (qpp * std::pow(q, -3.0) - 3.0 * std::pow(q, -4.0) * qp * qp) /
           std::sqrt(q);
  return k;
}

BoundaryCurvature DomainBoundary::curvature(double s) const {
  switch (kind_) {
    case BoundaryKind::Circle:
      return {1.0 / params_[0], 0.0, 0.0};
    case BoundaryKind::Ellipse:
      return ellipse_curvature_at_angle(params_[0], params_[1], theta_of_s(s));
    case BoundaryKind::Rectangle:
      return {0.0, 0.0, 0.0};
    case BoundaryKind::SampledClosedCurve: {
      const double w = wrap(s);
      return {sampled_->K(w), sampled_->K.d1(w), sampled_->K.d2(w)};
    }
  }
  return {};
}

double DomainBoundary::project(Vec2 p, double hint) const {
  if (kind_ == BoundaryKind::Circle) {
    const double phi = std::atan2(p.y - center_.y, p.x - center_.x);
    return wrap(phi * params_[0]);
  }
  if (kind_ == BoundaryKind::Rectangle) {
    const double x0 = params_[0], y0 = params_[1], x1 = params_[2], y1 = params_[3];
    const double w = x1 - x0, h = y1 - y0;
    const double cx = std::clamp(p.x, x0, x1), cy = std::clamp(p.y, y0, y1);
    const std::array<double, 4> d{std::abs(p.y - y0), std::abs(p.x - x1), std::abs(p.y - y1),
                                  std::abs(p.x - x0)};
    const bool in = p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    // nearest side: inside use the smallest distance; outside use clamped point
    int side = 0;
    if (in) {
      side = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
    } else if (cy == y0 && p.y < y0) {
      side = 0;
    } else if (cx == x1 && p.x > x1) {
      side = 1;
    } else if (cy == y1 && p.y > y1) {
      side = 2;
    } else {
      side = 3;
    }
    switch (side) {
      case 0:
        return wrap(cx - x0);
      case 1:
        return w + (cy - y0);
      case 2:
        return w + h + (x1 - cx);
      default:
        return wrap(2 * w + h + (y1 - cy));
    }
  }

  auto newton = [&](double s) {
    for (int it = 0; it < 30; ++it) {
      const Vec2 x = point(s);
      const Vec2 t = tangent(s);
      const double K = curvature(s).K;
      const Vec2 d = x - p;
      const double phi = d.dot(t);
      double dphi = 1.0 + K * d.dot(t.left());
      if (dphi < 0.1) dphi = 0.1;  // stay a descent step away from maxima
      double step = phi / dphi;
      step = std::clamp(step, -length_ / 32, length_ / 32);
      s = wrap(s - step);
      if (std::abs(step) < 1e-14 * std::max(1.0, length_)) break;
    }
    return s;
  };
  auto seed = [&]() {
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t i = 0; i < coarse_.size(); ++i) {
      const double d = (coarse_[i] - p).norm();
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return coarse_s_[best];
  };
  if (std::isfinite(hint)) {
    const double s = newton(wrap(hint));
    // accept if no coarse sample is markedly closer
    const double dist = (point(s) - p).norm();
    // a point this close to the wall cannot be nearer another stretch of it
    if (dist <= 1e-3 * length_) return s;
    const double seed_s = seed();
    if (dist <= (point(seed_s) - p).norm() + 1e-12) return s;
    return newton(seed_s);
  }
  return newton(seed());
}

double DomainBoundary::distance(Vec2 p) const { return (point(project(p)) - p).norm(); }

bool DomainBoundary::inside(Vec2 p) const {
  switch (kind_) {
    case BoundaryKind::Circle:
      return (p - center_).norm() < params_[0];
    case BoundaryKind::Ellipse: {
      const double u = (p.x - center_.x) / params_[0], v = (p.y - center_.y) / params_[1];
      return u * u + v * v < 1.0;
    }
    case BoundaryKind::Rectangle:
      return p.x > params_[0] && p.x < params_[2] && p.y > params_[1] && p.y < params_[3];
    case BoundaryKind::SampledClosedCurve: {
      bool in = false;
      for (std::size_t i = 0, j = coarse_.size() - 1; i < coarse_.size(); j = i++) {
        const Vec2 a = coarse_[i], b = coarse_[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
          in = !in;
        }
      }
      return in;
    }
  }
  return false;
}

void DomainBoundary::bounding_box(Vec2& lo, Vec2& hi) const {
  switch (kind_) {
    case BoundaryKind::Circle:
      lo = center_ - Vec2{params_[0], params_[0]};
      hi = center_ + Vec2{params_[0], params_[0]};
      return;
    case BoundaryKind::Ellipse:
      lo = center_ - Vec2{params_[0], params_[1]};
      hi = center_ + Vec2{params_[0], params_[1]};
      return;
    case BoundaryKind::Rectangle:
      lo = {params_[0], params_[1]};
      hi = {params_[2], params_[3]};
      return;
    case BoundaryKind::SampledClosedCurve:
      lo = hi = coarse_[0];
      for (const Vec2& q : coarse_) {
        lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
        hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
      }
      return;
  }
}

// ---------------------------------------------------------------------------
// interface curves

InterfaceCurve make_closed_curve(std::vector<Vec2> pts) {
  InterfaceCurve c;
  c.points = std::move(pts);
  c.topology = Topology::Closed;
  return c;
}

InterfaceCurve circle_curve(Vec2 center, double r, std::size_t n) {
  return ellipse_curve(center, r, r, n);
}

InterfaceCurve ellipse_curve(Vec2 center, double a, double b, std::size_t n, double rotation) {
  std::vector<Vec2> pts(n);
  const double cr = std::cos(rotation), sr = std::sin(rotation);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
    const double x = a * std::cos(t), y = b * std::sin(t);
    pts[i] = {center.x + cr * x - sr * y, center.y + sr * x + cr * y};
  }
  return make_closed_curve(std::move(pts));
}

std::vector<double> segment_lengths(const InterfaceCurve& c) {
  const std::size_t n = c.size();
  std::vector<double> h;
  const std::size_t m = c.closed() ? n : n - 1;
  h.reserve(m);
  for (std::size_t i = 0; i < m; ++i) h.push_back((c.points[(i + 1) % n] - c.points[i]).norm());
  return h;
}

namespace {

Vec2 reflect_across(Vec2 p, Vec2 origin, Vec2 dir) {
  const Vec2 d = p - origin;
  return origin + dir * (2.0 * d.dot(dir)) - d;
}

// Spline through the nodes. Attached curves with a known boundary are padded
// with mirror images across the boundary tangent lines at both ends so that
// the end nodes see a symmetric neighbourhood.
struct FittedCurve {
  CurveSpline spline;
  std::size_t offset;
  std::size_t n;
};

FittedCurve fit_curve(const InterfaceCurve& c, const DomainBoundary* b) {
  const std::size_t n = c.size();
  if (n < 4) throw TooFewNodes("curve has " + std::to_string(n) + " nodes");
  std::vector<double> x, y;
  x.reserve(n + 8);
  y.reserve(n + 8);
  std::size_t offset = 0;
  if (c.closed() || b == nullptr) {
    for (const Vec2& p : c.points) {
      x.push_back(p.x);
      y.push_back(p.y);
    }
    return {CurveSpline(x, y, c.closed()), 0, n};
  }
  // the natural end condition of the padded spline decays by about 0.27 per
  // knot, so ten ghosts leave it invisible at the real ends
  const std::size_t m = std::min<std::size_t>(10, n - 1);
  const Vec2 p0 = c.points.front(), p1 = c.points.back();
  const Vec2 t0 = b->tangent(b->project(p0, c.s_start));
  const Vec2 t1 = b->tangent(b->project(p1, c.s_end));
  for (std::size_t k = m; k >= 1; --k) {
    const Vec2 g = reflect_across(c.points[k], p0, t0);
    x.push_back(g.x);
    y.push_back(g.y);
  }
  offset = m;
  for (const Vec2& p : c.points) {
    x.push_back(p.x);
    y.push_back(p.y);
  }
  for (std::size_t k = 1; k <= m; ++k) {
    const Vec2 g = reflect_across(c.points[n - 1 - k], p1, t1);
    x.push_back(g.x);
    y.push_back(g.y);
  }
  return {CurveSpline(x, y, false), offset, n};
}

}  // namespace

double boundary_sector(const DomainBoundary& b, double s_from, double span) {
  if (span <= 0.0) return 0.0;
  const auto& pr = b.shape_params();
  const Vec2 c = b.center();
  switch (b.kind()) {
    case BoundaryKind::Circle: {
      const double r = pr[0];
      const double p0 = s_from / r, p1 = (s_from + span) / r;
      return 0.5 * (r * r * (p1 - p0) +
                    r * (c.x * (std::sin(p1) - std::sin(p0)) - c.y * (std::cos(p1) - std::cos(p0))));
    }
    case BoundaryKind::Ellipse: {
      const double a = pr[0], bb = pr[1];
      const Vec2 q0 = b.point(s_from), q1 = b.point(s_from + span);
      const double t0 = std::atan2((q0.y - c.y) / bb, (q0.x - c.x) / a);
      // branch of the end angle nearest to the rough estimate from the span
      const double guess = t0 + 2.0 * M_PI * span / b.total_length();
      double t1 = std::atan2((q1.y - c.y) / bb, (q1.x - c.x) / a);
      t1 += 2.0 * M_PI * std::round((guess - t1) / (2.0 * M_PI));
      return 0.5 * (a * bb * (t1 - t0) + c.x * bb * (std::sin(t1) - std::sin(t0)) -
                    c.y * a * (std::cos(t1) - std::cos(t0)));
    }
    case BoundaryKind::Rectangle: {
      // polygonal path through the corners passed on the way
      const double w = pr[2] - pr[0], h = pr[3] - pr[1];
      const std::array<double, 4> corners{w, w + h, 2 * w + h, b.total_length()};
      std::vector<Vec2> path{b.point(s_from)};
      double s = s_from;
      const double s_to = s_from + span;
      while (s < s_to) {
        const double base = std::floor(s / b.total_length()) * b.total_length();
        double next = base + b.total_length();
        for (double cc : corners) {
          if (base + cc > s + 1e-15) {
            next = base + cc;
            break;
          }
        }
        s = std::min(next, s_to);
        path.push_back(b.point(s));
      }
      double a2 = 0.0;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) a2 += path[i].cross(path[i + 1]);
      return 0.5 * a2;
    }
    case BoundaryKind::SampledClosedCurve: {
      constexpr int kPieces = 64;
      const double ds = span / kPieces;
      auto integrand = [&](double s) { return b.point(s).cross(b.tangent(s)); };
      double total = 0.0;
      for (int i = 0; i < kPieces; ++i) total += GL::integrate(integrand, s_from + i * ds, s_from + (i + 1) * ds);
      return 0.5 * total;
    }
  }
  return 0.0;
}

namespace {

// Endpoint parameters, refreshed by projection and checked for contact.
void attached_params(const InterfaceCurve& c, const DomainBoundary& b, double& s0, double& s1) {
  const double tol = 1e-8 * std::max(1.0, std::sqrt(b.area()));
  s0 = b.project(c.points.front(), c.s_start);
  s1 = b.project(c.points.back(), c.s_end);
  if ((b.point(s0) - c.points.front()).norm() > tol || (b.point(s1) - c.points.back()).norm() > tol) {
    throw EndpointsOffBoundary("attached curve endpoints are not on the boundary");
  }
}

}  // namespace

double curve_length(const InterfaceCurve& c) {
  if (c.size() < 4) {
    const auto h = segment_lengths(c);
    return std::accumulate(h.begin(), h.end(), 0.0);
  }
  const FittedCurve f = fit_curve(c, nullptr);
  const auto s = f.spline.arclength_at_knots();
  return s.back();
}

std::vector<double> curvature(const InterfaceCurve& c, const DomainBoundary* b) {
  const FittedCurve f = fit_curve(c, b);
  std::vector<double> k(f.n);
  const auto& t = f.spline.knots();
  for (std::size_t i = 0; i < f.n; ++i) k[i] = f.spline.curvature(t[f.offset + i]);
  return k;
}

std::vector<Vec2> normals(const InterfaceCurve& c, const DomainBoundary* b) {
  const FittedCurve f = fit_curve(c, b);
  std::vector<Vec2> nrm(f.n);
  const auto& t = f.spline.knots();
  for (std::size_t i = 0; i < f.n; ++i) {
    const double ti = t[f.offset + i];
    nrm[i] = Vec2{f.spline.dx(ti), f.spline.dy(ti)}.normalized().right();
  }
  return nrm;
}

InterfaceCurve redistribute(const InterfaceCurve& c, std::size_t n, const DomainBoundary* b) {
  if (n < 4) throw TooFewNodes("cannot redistribute onto " + std::to_string(n) + " nodes");
  const FittedCurve f = fit_curve(c, b);
  InterfaceCurve out = c;
  std::vector<double> x, y;
  if (c.closed()) {
    f.spline.resample(n, x, y);
  } else {
    f.spline.resample_between(f.offset, f.offset + f.n - 1, n, x, y);
  }
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.points[i] = {x[i], y[i]};
  if (!c.closed()) {
    // the ends are the original end nodes
    out.points.front() = c.points.front();
    out.points.back() = c.points.back();
  }
  return out;
}

double mean_over_curve(const InterfaceCurve& c, const std::vector<double>& q) {
  const std::size_t n = c.size();
  const auto h = segment_lengths(c);
  // deviations from q[0] so that a constant field comes back exactly
  const double q0 = q[0];
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const std::size_t j = (i + 1) % n;
    num += 0.5 * h[i] * ((q[i] - q0) + (q[j] - q0));
    den += h[i];
  }
  return q0 + num / den;
}

namespace {

// 0.5 * integral of X x X' over the spline between two knot indices.
double spline_sector(const CurveSpline& s, std::size_t k0, std::size_t k1) {
  const auto& t = s.knots();
  double total = 0.0;
  auto f = [&](double u) { return s.x(u) * s.dy(u) - s.y(u) * s.dx(u); };
  for (std::size_t i = k0; i < k1; ++i) {
    total += boost::math::quadrature::gauss<double, 5>::integrate(f, t[i], t[i + 1]);
  }
  return 0.5 * total;
}

}  // namespace

double enclosed_area(const InterfaceCurve& c, const DomainBoundary& b) {
  if (c.closed()) {
    const FittedCurve f = fit_curve(c, nullptr);
    return spline_sector(f.spline, 0, f.spline.knots().size() - 1);
  }
  double s0 = 0.0, s1 = 0.0;
  attached_params(c, b, s0, s1);
  const FittedCurve f = fit_curve(c, &b);
  double span = b.wrap(s0 - s1);
  return spline_sector(f.spline, f.offset, f.offset + f.n - 1) + boundary_sector(b, s1, span);
}

Vec2 enclosed_centroid(const InterfaceCurve& c, const DomainBoundary& b) {
  std::vector<Vec2> poly = c.points;
  if (!c.closed()) {
    double s0 = 0.0, s1 = 0.0;
    attached_params(c, b, s0, s1);
    const double span = b.wrap(s0 - s1);
    constexpr int kArc = 256;
    for (int i = 1; i < kArc; ++i) poly.push_back(b.point(s1 + span * i / kArc));
  }
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i], q = poly[(i + 1) % poly.size()];
    const double w = p.cross(q);
    a2 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

double attached_midpoint(const InterfaceCurve& c, const DomainBoundary& b) {
  if (c.closed()) throw NotAttached("midpoint of a closed curve");
  const double s0 = b.project(c.points.front(), c.s_start);
  const double s1 = b.project(c.points.back(), c.s_end);
  // the droplet footprint runs from s_end counterclockwise to s_start
  return b.wrap(s1 + 0.5 * b.wrap(s0 - s1));
}

namespace {

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return (q - p).cross(r - p); };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
      o4 != 0) {
    return true;
  }
  return false;
}

}  // namespace

bool self_intersects(const InterfaceCurve& c) {
  const std::size_t n = c.size();
  const std::size_t m = c.closed() ? n : n - 1;
  struct Seg {
    double xlo, xhi, ylo, yhi;
    std::size_t i;
  };
  std::vector<Seg> segs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = c.points[i], b = c.points[(i + 1) % n];
    segs[i] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y), i};
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return segs[a].xlo < segs[b].xlo; });
  std::vector<std::size_t> active;
  for (std::size_t idx : order) {
    const Seg& s = segs[idx];
    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](std::size_t a) { return segs[a].xhi < s.xlo; }),
                 active.end());
    for (std::size_t a : active) {
      const Seg& o = segs[a];
      if (o.yhi < s.ylo || s.yhi < o.ylo) continue;
      const std::size_t i = s.i, j = o.i;
      const std::size_t d = i > j ? i - j : j - i;
      if (d <= 1 || (c.closed() && d == m - 1)) continue;
      if (segments_cross(c.points[i], c.points[(i + 1) % n], c.points[j], c.points[(j + 1) % n])) {
        return true;
      }
    }
    active.push_back(idx);
  }
  return false;
}

void contact_angles(const InterfaceCurve& c, const DomainBoundary& b, double& start, double& end) {
  if (c.closed()) throw NotAttached("contact angle of a closed curve");
  const std::size_t n = c.size();
  if (n < 3) throw TooFewNodes("contact angle needs 3 nodes");
  // second-order one-sided derivative on the (possibly non-uniform) nodes
  auto end_tangent = [](Vec2 p0, Vec2 p1, Vec2 p2) {
    const double h1 = (p1 - p0).norm(), h2 = (p2 - p1).norm();
    const Vec2 d = p0 * (-(2 * h1 + h2) / (h1 * (h1 + h2))) + p1 * ((h1 + h2) / (h1 * h2)) +
                   p2 * (-h1 / (h2 * (h1 + h2)));
    return d.normalized();
  };
  const Vec2 ts = end_tangent(c.points[0], c.points[1], c.points[2]);
  const Vec2 te = end_tangent(c.points[n - 1], c.points[n - 2], c.points[n - 3]) * -1.0;
  const Vec2 bs = b.tangent(b.project(c.points[0], c.s_start));
  const Vec2 be = b.tangent(b.project(c.points[n - 1], c.s_end));
  start = std::acos(std::clamp(ts.dot(bs), -1.0, 1.0));
  end = std::acos(std::clamp(te.dot(be), -1.0, 1.0));
}

BoundaryFrame boundary_frame(const DomainBoundary& b, double s) {
  const Vec2 t = b.tangent(s);
  return {b.point(s), t, t.left()};
}

ArcModes fit_arc_modes(const InterfaceCurve& c, const DomainBoundary& b, double eps, std::size_t N) {
  if (c.closed()) throw NotAttached("fit_arc_modes needs an attached curve");
  const Vec2 chord_mid = (c.points.front() + c.points.back()) * 0.5;
  ArcModes out;
  out.s = b.project(chord_mid, attached_midpoint(c, b));
  const std::size_t n = c.size();
  // columns: 1, cos theta, cos 2theta .. cos N theta. The cos theta column is
  // a shift of the centre along the boundary; s is moved until it vanishes.
  const std::size_t cols = std::max<std::size_t>(N, 1) + 1;
  Eigen::MatrixXd A(n, cols);
  Eigen::VectorXd y(n);
  Eigen::VectorXd coef;
  for (int pass = 0; pass < 8; ++pass) {
    const BoundaryFrame fr = boundary_frame(b, out.s);
    double th_lo = INFINITY, th_hi = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 d = c.points[i] - fr.origin;
      const double xi = d.dot(fr.tau), eta = d.dot(fr.inward);
      const double rho = std::hypot(xi, eta);
      const double th = std::atan2(eta, xi);
      th_lo = std::min(th_lo, th);
      th_hi = std::max(th_hi, th);
      A(i, 0) = 1.0;
      A(i, 1) = std::cos(th);
      for (std::size_t k = 2; k <= N; ++k) A(i, k) = std::cos(static_cast<double>(k) * th);
      y[i] = std::log(rho / eps) / (eps * eps);
    }
    if (th_hi - th_lo < 0.5 * M_PI) throw FitDegenerate("angular coverage below pi/2");
    coef = A.colPivHouseholderQr().solve(y);
    // moving the origin by delta along tau changes ln(rho) by -delta cos(theta)/eps
    const double shift = coef[1] * eps * eps * eps;
    out.s = b.wrap(out.s + shift);
    if (std::abs(shift) < 1e-13 * eps) break;
  }
  out.R0 = coef[0];
  out.R.clear();
  for (std::size_t k = 2; k <= N; ++k) out.R.push_back(coef[k]);
  out.residual = std::sqrt((A * coef - y).squaredNorm() / static_cast<double>(n));
  return out;
}

InterfaceCurve synthesize_arc(const DomainBoundary& b, double s, double eps, double R0,
                              const std::vector<double>& R, std::size_t n_nodes) {
  if (n_nodes < 4) throw TooFewNodes("arc needs at least 4 nodes");
  const BoundaryFrame fr = boundary_frame(b, s);
  auto polar = [&](double th) {
    double e = R0;
    for (std::size_t k = 0; k < R.size(); ++k) e += R[k] * std::cos(static_cast<double>(k + 2) * th);
    const double rho = eps * std::exp(eps * eps * e);
    return fr.origin + (fr.tau * std::cos(th) + fr.inward * std::sin(th)) * rho;
  };
  // the ends sit where the polar curve meets the curved boundary, so the
  // nodes stay exactly on the curve instead of being snapped onto it
  auto height = [&](double th) {
    const Vec2 p = polar(th);
    const double sp = b.project(p, s);
    return (p - b.point(sp)).dot(b.tangent(sp).left());
  };
  auto end_angle = [&](double lo, double hi) {
    if (!(height(lo) < 0.0 && height(hi) > 0.0) && !(height(lo) > 0.0 && height(hi) < 0.0)) {
      throw FitDegenerate("arc does not cross the boundary near its ends");
    }
    boost::uintmax_t iters = 100;
    const auto r = boost::math::tools::toms748_solve(
        height, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
  };
  const double th0 = end_angle(-0.25 * M_PI, 0.25 * M_PI);
  const double th1 = end_angle(0.75 * M_PI, 1.25 * M_PI);
  InterfaceCurve c;
  c.topology = Topology::Attached;
  c.points.resize(n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j) {
    const double th = th0 + (th1 - th0) * static_cast<double>(j) / static_cast<double>(n_nodes - 1);
    c.points[j] = polar(th);
  }
  c.s_start = b.project(c.points.front(), s);
  c.s_end = b.project(c.points.back(), s);
  c.points.front() = b.point(c.s_start);
  c.points.back() = b.point(c.s_end);
  return c;
}

}  // namespace wavepin
