#include <doctest.h>

#include <cmath>

#include "wavepin/errors.hpp"
#include "wavepin/front1d.hpp"

using namespace wavepin;

namespace {

// Cubic kinetics: the front speed has the closed form c(v) = -3 u_m(v) / sqrt 2,
// with u_m the middle root of u^3 - u - v from Cardano's trigonometric form.
double cubic_mid_root(double v) {
  const double phi = std::acos(1.5 * std::sqrt(3.0) * v) / 3.0;
  return 2.0 / std::sqrt(3.0) * std::cos(phi - 2.0 * M_PI / 3.0);
}

double cubic_speed_oracle(double v) { return -3.0 * cubic_mid_root(v) / std::sqrt(2.0); }

}  // namespace

TEST_CASE("middle-root oracle sanity") {
  CHECK(std::abs(cubic_mid_root(0.0)) < 1e-15);
  const double um = cubic_mid_root(0.2);
  CHECK(um * um * um - um - 0.2 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(um == doctest::Approx(-0.2095).epsilon(1e-3));
}

TEST_CASE("v0 = 0 cubic front is the tanh kink") {
  const Kinetics k = Kinetics::cubic_symmetric();
  const FrontProfile p = solve_front(k, 0.0);
  CHECK(std::abs(p.c) < 1e-9);
  double err = 0.0, derr = 0.0;
  for (std::size_t i = 0; i < p.z.size(); ++i) {
    const double x = p.z[i] / std::sqrt(2.0);
    err = std::max(err, std::abs(p.U[i] + std::tanh(x)));
    const double sech = 1.0 / std::cosh(x);
    derr = std::max(derr, std::abs(p.dU[i] + sech * sech / std::sqrt(2.0)));
  }
  CHECK(err < 1e-6);
  CHECK(derr < 1e-6);
  CHECK(p.sigma == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-9));
  CHECK(std::abs(speed_by_quadrature(p, k)) < 1e-12);
}

TEST_CASE("profile invariants") {
  const Kinetics k = Kinetics::cubic_symmetric();
  for (double v : {-0.3, -0.1, 0.2}) {
    const FrontProfile p = solve_front(k, v);
    const auto& b = p.branches;
    CHECK(std::abs(p.U.front() - b.u_plus) < 1e-6);
    CHECK(std::abs(p.U.back() - b.u_minus) < 1e-6);
    CHECK(std::abs(p.U[p.z.size() / 2] - b.u_mid) < 1e-9);
    for (std::size_t i = 1; i + 1 < p.z.size(); ++i) CHECK(p.dU[i] < 0.0);
  }
}

TEST_CASE("shooting speed matches the closed form and the quadrature ratio") {
  const Kinetics k = Kinetics::cubic_symmetric();
  for (double v : {-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3}) {
    const FrontProfile p = solve_front(k, v);
    CHECK(std::abs(p.c - cubic_speed_oracle(v)) <= 1e-6);
    CHECK(std::abs(p.c - speed_by_quadrature(p, k)) <= 1e-6);
    if (v != 0.0) CHECK((p.c > 0.0) == (v > 0.0));
  }
  CHECK(solve_front(k, 0.2).c == doctest::Approx(0.4444).epsilon(1e-3));
  CHECK(solve_front(k, -0.2).c == doctest::Approx(-0.4444).epsilon(1e-3));
}

TEST_CASE("Mori kinetics: speed sign and two-way agreement") {
  const Kinetics k = Kinetics::mori_saturating(0.067, 1.0);
  const double vc = find_vc(k).vc;
  const Interval r = k.bistable_range();
  for (double t : {0.15, 0.5, 0.85}) {
    const double v = r.lo + t * r.width();
    const FrontProfile p = solve_front(k, v);
    CHECK(std::abs(p.c - speed_by_quadrature(p, k)) <= 1e-6);
    CHECK((p.c > 0.0) == (v > vc));
  }
}

TEST_CASE("grid refinement leaves c unchanged") {
  const Kinetics k = Kinetics::cubic_symmetric();
  const FrontProfile a = solve_front(k, 0.15, 0.0, 1025);
  const FrontProfile b = solve_front(k, 0.15, 0.0, 2049);
  CHECK(std::abs(a.c - b.c) < 1e-8);
  CHECK(std::abs(a.sigma - b.sigma) < 1e-8);
}

TEST_CASE("phase shift leaves c and sigma unchanged") {
  const Kinetics k = Kinetics::cubic_symmetric();
  const FrontProfile a = solve_front(k, 0.1);
  const FrontProfile b = solve_front(k, 0.1, 0.0, 2049, 0.75);
  CHECK(std::abs(a.c - b.c) < 1e-8);
  CHECK(std::abs(a.sigma - b.sigma) < 1e-8);
  // the shifted profile is the same curve translated
  const std::size_t i = b.z.size() / 2;
  const double dz = b.dz();
  const std::size_t j = i + static_cast<std::size_t>(std::lround(0.75 / dz));
  if (std::abs(b.z[j] - 0.75) < 1e-12) CHECK(std::abs(b.U[j] - b.branches.u_mid) < 1e-9);
}

TEST_CASE("beta") {
  const Kinetics k = Kinetics::cubic_symmetric();
  const FrontProfile p0 = solve_front(k, 0.0);
  CHECK(std::abs(beta(p0, k) + 3.0 / std::sqrt(2.0)) <= 1e-6);
  const double b1 = beta(solve_front(k, 0.1), k);
  CHECK(std::isfinite(b1));
  CHECK(std::abs(b1 - beta(p0, k)) < 0.2);
  // continuity: halving the step halves the change, roughly
  const double b05 = beta(solve_front(k, 0.05), k);
  CHECK(std::abs(b05 - beta(p0, k)) < std::abs(b1 - beta(p0, k)));

  // f_v == 0: zero numerator (v enters only through a constant shift of the roots)
  const Kinetics flat = Kinetics::custom(
      [](double u, double) { return -u * u * u + u; }, {-2, 2}, {-0.1, 0.1});
  const Kinetics cub = Kinetics::cubic_symmetric();
  FrontProfile pf = solve_front(cub, 0.0);
  CHECK(std::abs(beta(pf, flat)) < 1e-12);
}

TEST_CASE("speed table") {
  const Kinetics k = Kinetics::cubic_symmetric();
  const SpeedTable t = speed_table(k, -0.3, 0.3, 61);
  CHECK(std::abs(t.c_nodes()[30]) < 1e-9);
  CHECK(std::abs(t.c(0.0)) < 1e-9);
  CHECK(std::abs(t.c(0.15) - solve_front(k, 0.15).c) <= 1e-5);
  for (double v : {-0.255, -0.105, 0.015, 0.145, 0.295}) {
    CHECK(std::abs(t.c(v) - cubic_speed_oracle(v)) <= 1e-5);
  }
  // c'(0) for the cubic: u_m'(0) = -1, so c'(0) = 3/sqrt 2
  CHECK(t.dc(0.0) == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-4));
  CHECK(t.beta(0.0) == doctest::Approx(-3.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK_THROWS_AS(t.c(0.31), RangeError);
  CHECK_THROWS_AS(t.c(-0.5), RangeError);
  CHECK_THROWS_AS(speed_table(k, -0.3, 0.3, 4), RangeError);
}

TEST_CASE("errors") {
  const Kinetics k = Kinetics::cubic_symmetric();
  CHECK_THROWS_AS(solve_front(k, 0.5), OutsideBistableRange);
  CHECK_THROWS_AS(simpson({1.0, 2.0}, 0.1), DegenerateProfile);
}
