#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "wavepin/errors.hpp"
#include "wavepin/geometry.hpp"
#include "wavepin/reduced.hpp"

using namespace wavepin;

namespace {

constexpr double kA = 2.0, kB = 1.0;

std::shared_ptr<const DomainBoundary> ellipse21() {
  static const auto b = std::make_shared<const DomainBoundary>(DomainBoundary::ellipse(kA, kB));
  return b;
}

// K_s on the ellipse written out from K(theta) = ab / (a^2 sin^2 + b^2 cos^2)^(3/2)
// and ds/dtheta = (a^2 sin^2 + b^2 cos^2)^(1/2).
double ks_oracle(double theta) {
  const double sn = std::sin(theta), cs = std::cos(theta);
  const double q = kA * kA * sn * sn + kB * kB * cs * cs;
  const double dq = 2.0 * (kA * kA - kB * kB) * sn * cs;
  const double dK = -1.5 * kA * kB * std::pow(q, -2.5) * dq;
  return dK / std::sqrt(q);
}

double theta_of(const DomainBoundary& b, double s) {
  const Vec2 p = b.point(s);
  return std::atan2(p.y / kB, p.x / kA);
}

// c'(v_c) of the symmetric cubic: c = -3 u_m / sqrt 2 with u_m' = -1 at v = 0.
const double kCprime = 3.0 / std::sqrt(2.0);

}  // namespace

TEST_CASE("e_n coefficients") {
  auto rc = make_reduced_coeffs(ellipse21(), kCprime);
  const double L = ellipse21()->total_length();
  const double s = 0.3 * L;
  const double ks = ks_oracle(theta_of(*ellipse21(), s));
  CHECK(e_coeff(1, s, rc) == doctest::Approx(8.0 * ks / (3.0 * M_PI)).epsilon(1e-9));
  CHECK(e_coeff(3, s, rc) == doctest::Approx(-8.0 * ks / (5.0 * M_PI)).epsilon(1e-9));
  CHECK(e_coeff(5, s, rc) == doctest::Approx(8.0 * ks / (-21.0 * M_PI)).epsilon(1e-9));
  // the examples at K_s = 0.3
  CHECK(8.0 * 0.3 / (3.0 * M_PI) == doctest::Approx(0.2546).epsilon(2e-4));
  CHECK(e_coeff(3, s, rc) / ks * 0.3 == doctest::Approx(-0.1528).epsilon(2e-4));
  CHECK(e_coeff(4, s, rc) == 0.0);
  CHECK(e_coeff(6, s, rc) == 0.0);
  CHECK(e_coeff(0, s, rc) == 0.0);
  CHECK(e_coeff(2, s, rc) == 0.0);
  rc.e0_override = 0.7;
  rc.e2_override = -0.2;
  CHECK(e_coeff(0, s, rc) == 0.7);
  CHECK(e_coeff(2, s, rc) == -0.2);
}

TEST_CASE("drift rate") {
  SUBCASE("zero on a circle") {
    auto rc = make_reduced_coeffs(std::make_shared<const DomainBoundary>(DomainBoundary::circle(1.3)),
                                  kCprime);
    for (double s : {0.0, 1.0, 2.5, 7.0}) CHECK(rhs(make_reduced_state(s, 0, 0.1), rc).s == 0.0);
  }
  SUBCASE("zero at the major tips") {
    auto rc = make_reduced_coeffs(ellipse21(), kCprime);
    const double L = ellipse21()->total_length();
    CHECK(std::abs(rhs(make_reduced_state(0.0, 0, 0.1), rc).s) < 1e-15);
    CHECK(std::abs(rhs(make_reduced_state(0.5 * L, 0, 0.1), rc).s) < 1e-15);
  }
  SUBCASE("between co-vertex and tip") {
    auto rc = make_reduced_coeffs(ellipse21(), kCprime);
    const double L = ellipse21()->total_length();
    for (double f : {0.05, 0.125, 0.2, 0.3, 0.375, 0.45}) {
      const double s = f * L;
      const double ks = ks_oracle(theta_of(*ellipse21(), s));
      const double sdot = rhs(make_reduced_state(s, 0, 0.1), rc).s;
      CHECK((sdot > 0) == (ks > 0));
      CHECK(sdot == doctest::Approx(4.0 * 0.01 / (3.0 * M_PI) * ks).epsilon(1e-9));
    }
  }
  SUBCASE("odd under reflection through a tip") {
    auto rc = make_reduced_coeffs(ellipse21(), kCprime);
    const double L = ellipse21()->total_length();
    for (double s : {0.1, 0.7, 1.3, 2.0, 3.1}) {
      const double a = rhs(make_reduced_state(s, 0, 0.05), rc).s;
      const double b = rhs(make_reduced_state(L - s, 0, 0.05), rc).s;
      CHECK(std::abs(a + b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("R0 and mode rates") {
  auto rc = make_reduced_coeffs(ellipse21(), kCprime, -2.0, 0.5);
  ReducedState st = make_reduced_state(1.0, 0.75, 0.1, 4, 1.0);
  st.R = {0.1, -0.2, 0.05};
  const ReducedRates d = rhs(st, rc);
  CHECK(d.R0 == doctest::Approx(std::pow(0.1, -1.0) * kCprime * (-2.0) * 0.25));
  CHECK(d.R[0] == doctest::Approx((-3.0 * 0.1) / 0.1));
  CHECK(d.R[1] == doctest::Approx((-8.0 * -0.2 + 0.5 * e_coeff(3, 1.0, rc)) / 0.1));
  CHECK(d.R[2] == doctest::Approx((-15.0 * 0.05) / 0.1));
}

TEST_CASE("equilibria of Ellipse(2,1)") {
  auto rc = make_reduced_coeffs(ellipse21(), kCprime);
  const double L = ellipse21()->total_length();
  const auto eq = find_equilibria(rc, 4);
  REQUIRE(eq.size() == 4);
  const double where[4] = {0.0, 0.25 * L, 0.5 * L, 0.75 * L};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(ellipse21()->param_diff(eq[i].s, where[i])) < 1e-9);
    const bool tip = i % 2 == 0;
    CHECK(eq[i].stability == (tip ? Stability::Stable : Stability::Unstable));
    // K_ss = -3 a b (a^2 - b^2) / b^5 / b^2 at the tips, 3 a b (a^2 - b^2) / a^5 / a^2 at the co-vertices
    const double kss = tip ? -18.0 : 9.0 / 64.0;
    CHECK(eq[i].K_ss == doctest::Approx(kss).epsilon(1e-6));
    REQUIRE(eq[i].eigenvalues.size() == 5);
    CHECK(eq[i].eigenvalues[0] == doctest::Approx(4.0 / (3.0 * M_PI) * kss).epsilon(1e-6));
    CHECK(eq[i].eigenvalues[1] == doctest::Approx(-kCprime).epsilon(1e-8));
    CHECK(eq[i].eigenvalues[2] == -3.0);
    CHECK(eq[i].eigenvalues[3] == -8.0);
    CHECK(eq[i].eigenvalues[4] == -15.0);
    for (double r : eq[i].R) CHECK(std::abs(r) < 1e-9);
  }
}

TEST_CASE("equilibria on a circle are degenerate") {
  auto rc = make_reduced_coeffs(std::make_shared<const DomainBoundary>(DomainBoundary::circle(1.0)),
                                kCprime);
  CHECK_THROWS_AS(find_equilibria(rc), DegenerateCritical);
}

TEST_CASE("integrate: equilibrium at the tip stays put") {
  auto rc = make_reduced_coeffs(ellipse21(), kCprime, -1.0, 0.3);
  rc.e2_override = 0.12;
  ReducedState st = make_reduced_state(0.0, 0.3, 0.1, 8);
  for (std::size_t n = 2; n <= 8; ++n) st.R[n - 2] = e_coeff(n, 0.0, rc) / (2.0 * (n * n - 1.0));
  const auto tr = integrate(st, rc, 50.0, 0.01, 10.0);
  const ReducedState& f = tr.samples.back();
  CHECK(f.t == doctest::Approx(50.0));
  CHECK(std::abs(ellipse21()->param_diff(f.s, 0.0)) < 1e-12);
  CHECK(f.R0 == doctest::Approx(0.3).epsilon(1e-14));
  for (std::size_t n = 2; n <= 8; ++n) CHECK(f.mode(n) == doctest::Approx(st.mode(n)).epsilon(1e-12));
}

TEST_CASE("integrate: modes decay at (n^2 - 1) / eps and slave to e_n / 2(n^2 - 1)") {
  const auto circle = std::make_shared<const DomainBoundary>(DomainBoundary::circle(1.0));
  auto rc = make_reduced_coeffs(circle, kCprime);
  rc.e2_override = 0.3;
  ReducedState st = make_reduced_state(0.0, 0.0, 0.1, 4);
  st.R = {1.0, 1.0, 1.0};
  const double h = 1e-4;
  const auto tr = integrate(st, rc, 0.02, h, 0.02);
  const ReducedState& f = tr.samples.back();
  const double k = 0.02 / h;
  // implicit Euler in closed form, then the exact exponential it approximates
  const double r2_eq = 0.3 / 6.0;
  CHECK(f.mode(2) == doctest::Approx(r2_eq + (1.0 - r2_eq) * std::pow(1.0 + 3.0 * h / 0.1, -k)).epsilon(1e-12));
  CHECK(f.mode(3) == doctest::Approx(std::pow(1.0 + 8.0 * h / 0.1, -k)).epsilon(1e-12));
  CHECK(f.mode(4) == doctest::Approx(std::pow(1.0 + 15.0 * h / 0.1, -k)).epsilon(1e-12));
  CHECK(f.mode(3) == doctest::Approx(std::exp(-8.0 * 0.02 / 0.1)).epsilon(2e-2));
  CHECK(f.mode(4) == doctest::Approx(std::exp(-15.0 * 0.02 / 0.1)).epsilon(3e-2));
  // long run: slaved value
  const auto tr2 = integrate(st, rc, 5.0, 0.01, 5.0);
  CHECK(tr2.samples.back().mode(2) == doctest::Approx(r2_eq).epsilon(1e-12));
  CHECK(std::abs(tr2.samples.back().mode(3)) < 1e-12);
}

TEST_CASE("integrate: basins follow the curvature maxima") {
  auto rc = make_reduced_coeffs(ellipse21(), kCprime);
  const double L = ellipse21()->total_length();
  // l = 2 keeps the R0 equation at unit rate
  for (double sign : {+1.0, -1.0}) {
    ReducedState st = make_reduced_state(0.25 * L + sign * 0.02, 0.4, 0.1, 8, 2.0);
    const auto tr = integrate(st, rc, 2.0e4, 0.2, 100.0);
    const double target = sign > 0 ? 0.5 * L : 0.0;
    CHECK(std::abs(ellipse21()->param_diff(tr.samples.back().s, target)) < 1e-6);
    CHECK(std::abs(tr.samples.back().R0) < 1e-9);
    // distance from the co-vertex only grows
    double prev = 0.0;
    for (const auto& x : tr.samples) {
      const double d = std::abs(ellipse21()->param_diff(0.25 * L, x.s));
      CHECK(d >= prev - 1e-15);
      prev = d;
    }
  }
}

TEST_CASE("integrate: doubling the mode cutoff leaves s unchanged") {
  auto rc = make_reduced_coeffs(ellipse21(), kCprime);
  const double L = ellipse21()->total_length();
  const auto a = integrate(make_reduced_state(0.1 * L, 0.0, 0.1, 8), rc, 100.0, 0.01, 100.0);
  const auto b = integrate(make_reduced_state(0.1 * L, 0.0, 0.1, 16), rc, 100.0, 0.01, 100.0);
  CHECK(std::abs(a.samples.back().s - b.samples.back().s) < 1e-6);
  for (std::size_t n = 2; n <= 8; ++n) {
    CHECK(a.samples.back().mode(n) == doctest::Approx(b.samples.back().mode(n)).epsilon(1e-12));
  }
}

TEST_CASE("reduced error paths") {
  CHECK_THROWS_AS(make_reduced_state(0, 0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_reduced_coeffs(ellipse21(), kCprime, 0.5), std::invalid_argument);
  auto rc = make_reduced_coeffs(ellipse21(), kCprime, -1e30);
  CHECK_THROWS_AS(integrate(make_reduced_state(1.0, 1.0, 0.1), rc, 1.0, 0.1, 1.0), StepUnderflow);
  CHECK_THROWS_AS(integrate(make_reduced_state(1.0, 1.0, 0.1), rc, 0.0, 0.1, 1.0), std::invalid_argument);
}
