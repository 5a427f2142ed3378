#include "wavepin/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavepin/errors.hpp"

namespace wavepin {

std::size_t GridSpec::count_inside() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::size_t connected_components(const GridSpec& g) {
  std::vector<int> label(g.size(), -1);
  std::vector<std::size_t> stack;
  std::size_t comps = 0;
  for (std::size_t start = 0; start < g.size(); ++start) {
    if (!g.mask[start] || label[start] >= 0) continue;
    stack.push_back(start);
    label[start] = static_cast<int>(comps);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const std::size_t i = k % g.nx, j = k / g.nx;
      auto visit = [&](std::size_t n) {
        if (g.mask[n] && label[n] < 0) {
          label[n] = static_cast<int>(comps);
          stack.push_back(n);
        }
      };
      if (i > 0) visit(k - 1);
      if (i + 1 < g.nx) visit(k + 1);
      if (j > 0) visit(k - g.nx);
      if (j + 1 < g.ny) visit(k + g.nx);
    }
    ++comps;
  }
  return comps;
}

namespace {

void validate(const GridSpec& g) {
  if (g.nx == 0 || g.ny == 0 || !(g.h > 0.0)) throw InvalidGrid("empty grid");
  if (g.count_inside() == 0) throw InvalidGrid("mask has no interior cells");
  const std::size_t c = connected_components(g);
  if (c != 1) throw InvalidGrid("mask has " + std::to_string(c) + " connected components");
}

}  // namespace

GridSpec make_grid(std::shared_ptr<const DomainBoundary> domain, double h) {
  if (!(h > 0.0)) throw InvalidGrid("grid spacing must be positive");
  Vec2 lo, hi;
  domain->bounding_box(lo, hi);
  GridSpec g;
  g.h = h;
  g.nx = static_cast<std::size_t>(std::ceil((hi.x - lo.x) / h)) + 2;
  g.ny = static_cast<std::size_t>(std::ceil((hi.y - lo.y) / h)) + 2;
  const Vec2 mid = (lo + hi) * 0.5;
  g.origin = {mid.x - 0.5 * h * static_cast<double>(g.nx), mid.y - 0.5 * h * static_cast<double>(g.ny)};
  g.mask.assign(g.size(), 0);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) g.mask[g.idx(i, j)] = domain->inside(g.center(i, j));
  }
  g.domain = std::move(domain);
  validate(g);
  return g;
}

GridSpec rectangle_grid(double x0, double y0, std::size_t nx, std::size_t ny, double h) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.h = h;
  g.origin = {x0, y0};
  g.mask.assign(nx * ny, 1);
  g.domain = std::make_shared<DomainBoundary>(
      DomainBoundary::rectangle(x0, y0, x0 + h * static_cast<double>(nx), y0 + h * static_cast<double>(ny)));
  validate(g);
  return g;
}

GridSpec interval_grid(double length, std::size_t n) {
  return rectangle_grid(0.0, 0.0, n, 1, length / static_cast<double>(n));
}

}  // namespace wavepin
