#pragma once

#include <vector>

#include "wavepin/geometry.hpp"
#include "wavepin/grid.hpp"

namespace wavepin {

struct FieldContour {
  double level = 0.0;
  std::vector<InterfaceCurve> curves;
};

/// Marching squares over quads of four inside cell centres, with linear
/// interpolation along quad edges. Saddles are split by the quad average.
/// Curves run with the region field > level on their left. Chains that end
/// on the edge of the masked region become Attached and are extended by the
/// projection of the end point onto the domain boundary.
FieldContour extract_contour(const std::vector<double>& field, double level, const GridSpec& grid);

/// Level crossings along x for a one-dimensional grid (ny == 1), by linear
/// interpolation between cell centres.
std::vector<double> level_crossings_1d(const std::vector<double>& field, double level,
                                       const GridSpec& grid);

/// Shoelace area of the polygon through the nodes, closed along the domain
/// boundary for Attached curves. Used for contour-derived curves whose node
/// spacing is too irregular for spline fits.
double polygon_area(const InterfaceCurve& c, const DomainBoundary& b);
double polygon_length(const InterfaceCurve& c);

}  // namespace wavepin
