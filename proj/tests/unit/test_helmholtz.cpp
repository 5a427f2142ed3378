#include <doctest.h>

#include <chrono>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "wavepin/errors.hpp"
#include "wavepin/grid.hpp"
#include "wavepin/helmholtz.hpp"

using namespace wavepin;

namespace {

// Dense assembly of I - lambda h^2 Delta with zero-flux mask edges, built
// straight from the mask as an independent reference.
Eigen::MatrixXd dense_operator(const GridSpec& g, double lambda) {
  const auto n = static_cast<long>(g.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const auto k = static_cast<long>(g.idx(i, j));
      if (!g.inside(i, j)) continue;
      auto couple = [&](std::size_t i2, std::size_t j2) {
        if (!g.inside(i2, j2)) return;
        const auto k2 = static_cast<long>(g.idx(i2, j2));
        A(k, k) += lambda;
        A(k, k2) -= lambda;
      };
      if (i > 0) couple(i - 1, j);
      if (i + 1 < g.nx) couple(i + 1, j);
      if (j > 0) couple(i, j - 1);
      if (j + 1 < g.ny) couple(i, j + 1);
    }
  }
  return A;
}

std::vector<double> random_field(const GridSpec& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> b(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.mask[k]) b[k] = U(rng);
  return b;
}

double masked_sum(const GridSpec& g, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.mask[k]) s += x[k];
  return s;
}

}  // namespace

TEST_CASE("operator is symmetric and conserves the sum") {
  auto dom = std::make_shared<DomainBoundary>(DomainBoundary::ellipse(1.0, 0.6));
  const GridSpec g = make_grid(dom, 0.05);
  const HelmholtzSolver H(g, 3.7);
  const auto x = random_field(g, 1), y = random_field(g, 2);
  std::vector<double> Ax, Ay;
  H.apply(x, Ax);
  H.apply(y, Ay);
  double xAy = 0.0, yAx = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    xAy += x[k] * Ay[k];
    yAx += y[k] * Ax[k];
  }
  CHECK(xAy == doctest::Approx(yAx).epsilon(1e-13));
  CHECK(masked_sum(g, Ax) == doctest::Approx(masked_sum(g, x)).epsilon(1e-12));
}

TEST_CASE("solution matches a dense solve on a masked grid") {
  auto dom = std::make_shared<DomainBoundary>(DomainBoundary::circle(1.0));
  const GridSpec g = make_grid(dom, 0.07);
  REQUIRE(g.count_inside() > 256);  // at least one coarse level
  for (double lambda : {0.0, 0.3, 50.0, 5e4}) {
    const HelmholtzSolver H(g, lambda);
    CHECK(H.levels() >= 2);
    const auto b = random_field(g, 7);
    std::vector<double> x(g.size(), 0.0);
    H.solve(b, x, 1e-12);
    const Eigen::MatrixXd A = dense_operator(g, lambda);
    Eigen::VectorXd bb(static_cast<long>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) bb[static_cast<long>(k)] = b[k];
    const Eigen::VectorXd ref = A.ldlt().solve(bb);
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!g.mask[k]) continue;
      err = std::max(err, std::abs(x[k] - ref[static_cast<long>(k)]));
      scale = std::max(scale, std::abs(ref[static_cast<long>(k)]));
    }
    CHECK(err < 1e-9 * scale);
    CHECK(masked_sum(g, x) == doctest::Approx(masked_sum(g, b)).epsilon(1e-9));
  }
}

TEST_CASE("one-dimensional grids coarsen along x only") {
  const GridSpec g = interval_grid(1.0, 1000);
  const HelmholtzSolver H(g, 1e5);
  const auto b = random_field(g, 3);
  std::vector<double> x(g.size(), 0.0);
  const int it = H.solve(b, x, 1e-10);
  CHECK(it < 30);
  std::vector<double> Ax;
  H.apply(x, Ax);
  double res = 0.0, bn = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    res += (Ax[k] - b[k]) * (Ax[k] - b[k]);
    bn += b[k] * b[k];
  }
  CHECK(std::sqrt(res / bn) <= 1e-10);
}

TEST_CASE("multigrid keeps iteration counts small on a large stiff problem") {
  const GridSpec g = rectangle_grid(0.0, 0.0, 256, 256, 1.0 / 256);
  const HelmholtzSolver H(g, 8192.0);
  const auto b = random_field(g, 5);
  std::vector<double> x(g.size(), 0.0);
  const auto t0 = std::chrono::steady_clock::now();
  const int it = H.solve(b, x, 1e-10);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("iterations " << it << ", " << secs << " s");
  CHECK(it <= 25);
}

TEST_CASE("warm start and zero right-hand side") {
  const GridSpec g = rectangle_grid(0.0, 0.0, 40, 30, 0.1);
  const HelmholtzSolver H(g, 10.0);
  const auto b = random_field(g, 9);
  std::vector<double> x(g.size(), 0.0);
  H.solve(b, x);
  CHECK(H.solve(b, x) == 0);
  std::vector<double> zero(g.size(), 0.0), y(g.size(), 1.0);
  CHECK(H.solve(zero, y) == 0);
  for (double v : y) CHECK(v == 0.0);
  CHECK_THROWS_AS(H.solve(b, x = std::vector<double>(g.size(), 0.0), 1e-14, 1), SolverDivergence);
}
