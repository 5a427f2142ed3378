#include "wavepin/contour.hpp"

#include <array>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace wavepin {

namespace {

struct Segment {
  std::size_t from;  // edge keys
  std::size_t to;
};

}  // namespace

FieldContour extract_contour(const std::vector<double>& field, double level, const GridSpec& g) {
  FieldContour out;
  out.level = level;
  if (g.ny < 2 || g.nx < 2) return out;

  auto hkey = [&](std::size_t i, std::size_t j) { return 2 * g.idx(i, j); };
  auto vkey = [&](std::size_t i, std::size_t j) { return 2 * g.idx(i, j) + 1; };
  // crossing point on an edge given by its two corner cells
  std::unordered_map<std::size_t, Vec2> points;
  auto crossing = [&](std::size_t key, std::size_t ka, std::size_t kb, Vec2 pa, Vec2 pb) {
    if (points.count(key)) return;
    const double fa = field[ka], fb = field[kb];
    const double t = (level - fa) / (fb - fa);
    points[key] = pa + (pb - pa) * t;
  };

  std::vector<Segment> segs;
  for (std::size_t j = 0; j + 1 < g.ny; ++j) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const std::array<std::size_t, 4> k{g.idx(i, j), g.idx(i + 1, j), g.idx(i + 1, j + 1),
                                         g.idx(i, j + 1)};
      if (!g.mask[k[0]] || !g.mask[k[1]] || !g.mask[k[2]] || !g.mask[k[3]]) continue;
      const std::array<Vec2, 4> p{g.center(i, j), g.center(i + 1, j), g.center(i + 1, j + 1),
                                  g.center(i, j + 1)};
      std::array<double, 4> f{};
      int bits = 0;
      for (int c = 0; c < 4; ++c) {
        f[c] = field[k[c]];
        if (f[c] > level) bits |= 1 << c;
      }
      if (bits == 0 || bits == 15) continue;
      // edges: 0 bottom (c0-c1), 1 right (c1-c2), 2 top (c3-c2), 3 left (c0-c3)
      const std::array<std::size_t, 4> key{hkey(i, j), vkey(i + 1, j), hkey(i, j + 1), vkey(i, j)};
      const std::array<std::array<int, 2>, 4> ends{{{0, 1}, {1, 2}, {3, 2}, {0, 3}}};
      auto high = [&](int c) { return (bits >> c) & 1; };
      auto add = [&](int ea, int eb, int ref) {
        for (int e : {ea, eb}) {
          crossing(key[e], k[ends[e][0]], k[ends[e][1]], p[ends[e][0]], p[ends[e][1]]);
        }
        const Vec2 P = points[key[ea]], Q = points[key[eb]];
        const double side = (Q - P).cross(p[ref] - P);
        const bool want_left = high(ref);
        if ((side > 0.0) == want_left) {
          segs.push_back({key[ea], key[eb]});
        } else {
          segs.push_back({key[eb], key[ea]});
        }
      };
      if (bits == 5 || bits == 10) {
        const double avg = 0.25 * (f[0] + f[1] + f[2] + f[3]);
        const bool center_high = avg > level;
        // cut off the corners that are disconnected from the centre
        const bool cut_odd = (bits == 5) == center_high;  // corners 1 and 3
        if (cut_odd) {
          add(0, 1, 1);
          add(2, 3, 3);
        } else {
          add(3, 0, 0);
          add(1, 2, 2);
        }
        continue;
      }
      std::array<int, 2> crossed{};
      int nc = 0;
      for (int e = 0; e < 4; ++e) {
        if (high(ends[e][0]) != high(ends[e][1])) crossed[nc++] = e;
      }
      int ref = 0;
      for (int c = 1; c < 4; ++c) {
        if (std::abs(f[c] - level) > std::abs(f[ref] - level)) ref = c;
      }
      add(crossed[0], crossed[1], ref);
    }
  }

  std::unordered_map<std::size_t, std::size_t> by_start;
  std::unordered_set<std::size_t> ends_set;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_start[segs[s].from] = s;
    ends_set.insert(segs[s].to);
  }
  std::vector<char> used(segs.size(), 0);
  const double dup_tol = 1e-12 * g.h;

  auto walk = [&](std::size_t first, bool open) {
    InterfaceCurve c;
    c.topology = open ? Topology::Attached : Topology::Closed;
    std::size_t s = first;
    c.points.push_back(points[segs[s].from]);
    while (true) {
      used[s] = 1;
      const Vec2 q = points[segs[s].to];
      if ((q - c.points.back()).norm() > dup_tol) c.points.push_back(q);
      auto it = by_start.find(segs[s].to);
      if (it == by_start.end() || used[it->second]) break;
      s = it->second;
    }
    if (!open && c.points.size() > 1 && (c.points.back() - c.points.front()).norm() <= dup_tol) {
      c.points.pop_back();
    }
    if (open && g.domain) {
      const DomainBoundary& b = *g.domain;
      c.s_start = b.project(c.points.front());
      c.s_end = b.project(c.points.back());
      const Vec2 ps = b.point(c.s_start), pe = b.point(c.s_end);
      if ((ps - c.points.front()).norm() > dup_tol) c.points.insert(c.points.begin(), ps);
      else c.points.front() = ps;
      if ((pe - c.points.back()).norm() > dup_tol) c.points.push_back(pe);
      else c.points.back() = pe;
    }
    return c;
  };

  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s] && !ends_set.count(segs[s].from)) out.curves.push_back(walk(s, true));
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s]) out.curves.push_back(walk(s, false));
  }
  return out;
}

std::vector<double> level_crossings_1d(const std::vector<double>& field, double level,
                                       const GridSpec& g) {
  std::vector<double> xs;
  for (std::size_t i = 0; i + 1 < g.nx; ++i) {
    const double a = field[i] - level, b = field[i + 1] - level;
    if ((a > 0.0) != (b > 0.0)) {
      const double x0 = g.center(i, 0).x;
      xs.push_back(x0 + g.h * a / (a - b));
    }
  }
  return xs;
}

double polygon_area(const InterfaceCurve& c, const DomainBoundary& b) {
  const std::size_t n = c.size();
  double a2 = 0.0;
  const std::size_t m = c.closed() ? n : n - 1;
  for (std::size_t i = 0; i < m; ++i) a2 += c.points[i].cross(c.points[(i + 1) % n]);
  double area = 0.5 * a2;
  if (!c.closed()) {
    const double s0 = b.project(c.points.front(), c.s_start);
    const double s1 = b.project(c.points.back(), c.s_end);
    area += boundary_sector(b, s1, b.wrap(s0 - s1));
  }
  return area;
}

double polygon_length(const InterfaceCurve& c) {
  double len = 0.0;
  for (double h : segment_lengths(c)) len += h;
  return len;
}

}  // namespace wavepin
