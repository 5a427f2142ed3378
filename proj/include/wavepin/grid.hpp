#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "wavepin/geometry.hpp"

namespace wavepin {

/// Cell-centred structured grid with an inside/outside mask. Cell (i, j) has
/// centre origin + ((i + 1/2) h, (j + 1/2) h) and flat index j * nx + i.
/// ny == 1 is the one-dimensional mode: the y direction carries no flux and
/// the cell measure is h instead of h^2.
struct GridSpec {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double h = 0.0;
  Vec2 origin;
  std::vector<std::uint8_t> mask;
  std::shared_ptr<const DomainBoundary> domain;

  std::size_t size() const { return nx * ny; }
  std::size_t idx(std::size_t i, std::size_t j) const { return j * nx + i; }
  bool inside(std::size_t i, std::size_t j) const { return mask[idx(i, j)] != 0; }
  Vec2 center(std::size_t i, std::size_t j) const {
    return {origin.x + (static_cast<double>(i) + 0.5) * h,
            origin.y + (static_cast<double>(j) + 0.5) * h};
  }
  bool one_d() const { return ny == 1; }
  double cell_measure() const { return one_d() ? h : h * h; }
  std::size_t count_inside() const;
  /// Staircase measure of the masked region.
  double masked_measure() const { return cell_measure() * static_cast<double>(count_inside()); }
};

/// Cells whose centres lie inside `domain`, on the smallest grid covering its
/// bounding box with one layer of padding. Throws InvalidGrid if the masked
/// cells are empty or disconnected.
GridSpec make_grid(std::shared_ptr<const DomainBoundary> domain, double h);

/// Fully unmasked rectangle [x0, x0 + nx h] x [y0, y0 + ny h].
GridSpec rectangle_grid(double x0, double y0, std::size_t nx, std::size_t ny, double h);

/// One-dimensional interval [0, length] split into n cells.
GridSpec interval_grid(double length, std::size_t n);

/// Number of 4-connected components of the masked cells.
std::size_t connected_components(const GridSpec& g);

}  // namespace wavepin
