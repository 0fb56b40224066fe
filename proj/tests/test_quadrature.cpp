// Adaptive Gauss-Kronrod quadrature: exactness on polynomials, agreement
// with closed-form integrals, orientation, split points, vector integrands,
// error estimates, and the failure contract.

#include <catch2/catch_amalgamated.hpp>
#include <array>
#include <cmath>

#include "lz3/quadrature.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::array<double, 1> one(double v) { return {v}; }
}  // namespace

TEST_CASE("polynomials up to the Kronrod degree are integrated exactly") {
  // A single K15 panel is exact for polynomials of degree <= 22; x^10 over
  // [0, 1] must come out at full precision with one panel.
  const auto r = lz3::integrate_gk<1>(
      [](double x) { return one(std::pow(x, 10)); }, 0.0, 1.0, 1e-10);
  // Exact up to summation rounding (a few ulps across 15 node products).
  CHECK_THAT(r.value[0], WithinRel(1.0 / 11.0, 1e-14));
  CHECK(r.panels == 1);
}

TEST_CASE("classic closed forms") {
  const auto s = lz3::integrate_gk<1>(
      [](double x) { return one(std::sin(x)); }, 0.0, kPi, 1e-12);
  CHECK_THAT(s.value[0], WithinAbs(2.0, 1e-13));

  const auto e = lz3::integrate_gk<1>(
      [](double x) { return one(std::exp(-x)); }, 0.0, 30.0, 1e-12);
  CHECK_THAT(e.value[0], WithinAbs(1.0 - std::exp(-30.0), 1e-12));

  // Oscillatory integrand: forces subdivision but stays accurate. The
  // endpoint 7 is incommensurate with the period, so no node symmetry can
  // cancel the panel sums the way a whole number of periods would.
  const double w = 40.0;
  const auto o = lz3::integrate_gk<1>(
      [w](double x) { return one(std::sin(w * x)); }, 0.0, 7.0, 1e-12);
  CHECK_THAT(o.value[0], WithinAbs((1.0 - std::cos(w * 7.0)) / w, 1e-11));
  CHECK(o.panels > 1);
}

TEST_CASE("reversed limits negate the value") {
  auto f = [](double x) { return one(x * x); };
  const auto fwd = lz3::integrate_gk<1>(f, 0.0, 2.0, 1e-12);
  const auto bwd = lz3::integrate_gk<1>(f, 2.0, 0.0, 1e-12);
  CHECK_THAT(fwd.value[0], WithinRel(8.0 / 3.0, 1e-14));
  CHECK(bwd.value[0] == -fwd.value[0]);
  // Degenerate interval integrates to zero without evaluating anything.
  const auto z = lz3::integrate_gk<1>(f, 1.0, 1.0, 1e-12);
  CHECK(z.value[0] == 0.0);
  CHECK(z.panels == 0);
}

TEST_CASE("vector integrands integrate componentwise in one pass") {
  const auto r = lz3::integrate_gk<3>(
      [](double x) {
        return std::array<double, 3>{1.0, x, std::cos(x)};
      },
      0.0, 2.0, 1e-12);
  CHECK_THAT(r.value[0], WithinRel(2.0, 1e-14));
  CHECK_THAT(r.value[1], WithinRel(2.0, 1e-14));
  CHECK_THAT(r.value[2], WithinRel(std::sin(2.0), 1e-13));
}

TEST_CASE("split points seed panel boundaries at known kinks") {
  // |x - 0.3| has a kink; seeding the kink lets coarse panels converge.
  auto f = [](double x) { return one(std::abs(x - 0.3)); };
  const double exact = 0.5 * (0.3 * 0.3 + 0.7 * 0.7);
  const auto with_split = lz3::integrate_gk<1>(f, 0.0, 1.0, 1e-13, {0.3});
  CHECK_THAT(with_split.value[0], WithinRel(exact, 1e-13));
  CHECK(with_split.panels == 2);
  // Split points outside the interval are ignored.
  const auto outside = lz3::integrate_gk<1>(f, 0.0, 1.0, 1e-9, {-5.0, 9.0});
  CHECK_THAT(outside.value[0], WithinRel(exact, 1e-9));
}

TEST_CASE("error estimate bounds the true error on smooth integrands") {
  const auto r = lz3::integrate_gk<1>(
      [](double x) { return one(std::sin(3.0 * x) * std::exp(-0.2 * x)); },
      0.0, 12.0, 1e-10);
  const double exact =
      (3.0 - std::exp(-2.4) * (0.2 * std::sin(36.0) + 3.0 * std::cos(36.0))) /
      (3.0 * 3.0 + 0.2 * 0.2);
  CHECK(std::abs(r.value[0] - exact) <= std::max(r.error_estimate, 1e-13));
  CHECK(r.error_estimate <= 1e-10);
}

TEST_CASE("panel exhaustion raises a numerical failure") {
  // An integrable singularity cannot reach 1e-14 with two panels.
  auto nasty = [](double x) { return one(1.0 / std::sqrt(std::abs(x) + 1e-300)); };
  try {
    lz3::integrate_gk<1>(nasty, 0.0, 1.0, 1e-14, {}, 2);
    FAIL("expected throw");
  } catch (const lz3::error& e) {
    CHECK(e.code() == lz3::errc::quadrature_failure);
    CHECK(lz3::is_numerical_failure(e.code()));
  }
}
