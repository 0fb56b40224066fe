// Landau-Zener node quantities against frozen high-precision reference
// values (computed independently with 50-digit arithmetic and rounded to
// double), plus structural properties of the crossing matrices.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "lz3/lz.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("arg Gamma(1 - i x) matches frozen references") {
  // Reference values straddle the internal Lanczos/Binet switch at x = 10.
  const struct {
    double x, ref;
  } table[] = {
      {0.25, 0.1382373401412416},   {0.5, 0.2440582989054278},
      {1.0, 0.3016403204675332},    {2.0, -0.1296463163097883},
      {5.0, -3.81589857461492448},  {10.0, -13.8029129742299007},
      {30.0, -72.8185417325709856}, {100.0, -361.3015834260953946},
  };
  for (const auto& row : table) {
    CAPTURE(row.x);
    CHECK_THAT(lz3::arg_gamma_one_minus_i_x(row.x),
               WithinRel(row.ref, 1e-12));
  }
}

TEST_CASE("arg Gamma(1 - i x) is odd and vanishes at zero") {
  CHECK(lz3::arg_gamma_one_minus_i_x(0.0) == 0.0);
  for (double x : {0.3, 1.7, 9.5, 42.0})
    CHECK_THAT(lz3::arg_gamma_one_minus_i_x(-x),
               WithinAbs(-lz3::arg_gamma_one_minus_i_x(x), 1e-13));
}

TEST_CASE("arg Gamma(1 - i x) is continuous across the branch switch") {
  // The implementation switches series at x = 10. A straddle test would be
  // dominated by the function's own slope (about -ln 10 per unit x), so
  // evaluate both branches at the switch point itself: the public function
  // takes the Binet path at x = 10, the Lanczos series is called directly.
  const double binet_side = lz3::arg_gamma_one_minus_i_x(10.0);
  const double lanczos_side =
      lz3::detail::log_gamma_lanczos(lz3::cplx(1.0, -10.0)).imag();
  CHECK_THAT(lanczos_side - binet_side, WithinAbs(0.0, 1e-12));
}

TEST_CASE("LZ phase matches frozen references") {
  const struct {
    double alpha, ref;
  } table[] = {
      {0.1, 0.7351182175216855}, {0.3, 0.5303415863763781},
      {0.5, 0.3270619132587173}, {1.0, 0.0870384838649815},
      {2.0, 0.0208775513044758}, {3.0, 0.0092630832212480},
  };
  for (const auto& row : table) {
    CAPTURE(row.alpha);
    // The arg-Gamma kernel carries ~1e-13 absolute error, which dominates
    // the relative error once phi itself is small (large alpha), so accept
    // either bound.
    CHECK_THAT(lz3::lz_phase(row.alpha),
               WithinRel(row.ref, 1e-12) || WithinAbs(row.ref, 5e-13));
  }
}

TEST_CASE("LZ phase limit at zero coupling is pi/4") {
  CHECK_THAT(lz3::lz_phase(0.0), WithinRel(kPi / 4.0, 1e-15));
  // Approach from above stays continuous.
  CHECK_THAT(lz3::lz_phase(1e-6), WithinAbs(kPi / 4.0, 1e-10));
}

TEST_CASE("LZ phase decreases monotonically toward zero") {
  double prev = lz3::lz_phase(0.0);
  for (double a : {0.2, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double cur = lz3::lz_phase(a);
    CHECK(cur < prev);
    CHECK(cur > 0.0);
    prev = cur;
  }
  // Large-alpha asymptote: phi ~ 1/(12 alpha^2) to leading order.
  CHECK_THAT(lz3::lz_phase(20.0), WithinRel(1.0 / (12.0 * 400.0), 1e-3));
}

TEST_CASE("node probabilities match frozen references") {
  SECTION("alpha = 1") {
    const lz3::LZNode n = lz3::make_node(1.0, 1.0, 1.0);
    CHECK_THAT(n.p, WithinRel(1.867442731707989e-3, 1e-14));
    CHECK_THAT(n.q, WithinRel(0.9981325572682920, 1e-15));
    CHECK_THAT(n.q * n.p, WithinRel(1.863955389351780e-3, 1e-14));
    CHECK_THAT(n.q * n.q, WithinRel(0.9962686018789402, 1e-15));
  }
  SECTION("alpha = 0.1") {
    const lz3::LZNode n = lz3::make_node(0.1, 1.0, -1.0);
    CHECK_THAT(n.p, WithinRel(0.9391013674242926, 1e-14));
  }
  SECTION("alpha = 3") {
    const lz3::LZNode n = lz3::make_node(3.0, 1.0, 1.0);
    CHECK_THAT(n.p, WithinRel(2.762012443522353e-25, 1e-13));
  }
}

TEST_CASE("make_node scales alpha as coupling over sqrt(beta)") {
  const lz3::LZNode n = lz3::make_node(3.0, 4.0, -0.5);
  CHECK_THAT(n.alpha, WithinRel(1.5, 1e-15));
  CHECK(n.t_cross == -0.5);
  CHECK_THAT(n.p + n.q, WithinRel(1.0, 1e-15));
  // Same alpha from different (coupling, beta) pairs gives the same node
  // quantities.
  const lz3::LZNode m = lz3::make_node(1.5, 1.0, -0.5);
  CHECK(n.p == m.p);
  CHECK(n.phi == m.phi);
}

TEST_CASE("make_node rejects invalid arguments") {
  CHECK_THROWS_AS(lz3::make_node(-0.1, 1.0, 0.0), lz3::error);
  CHECK_THROWS_AS(lz3::make_node(1.0, 0.0, 0.0), lz3::error);
  try {
    lz3::make_node(1.0, -2.0, 0.0);
    FAIL("expected throw");
  } catch (const lz3::error& e) {
    CHECK(e.code() == lz3::errc::non_positive_beta);
  }
}

TEST_CASE("crossing matrices are unitary with the documented block structure") {
  for (double a : {0.0, 0.3, 1.0, 2.5}) {
    CAPTURE(a);
    const lz3::LZNode n = lz3::make_node(a, 1.0, 1.0);
    const lz3::CMat3 um = lz3::lz_matrix_minus(n);
    const lz3::CMat3 up = lz3::lz_matrix_plus(n);
    CHECK(lz3::unitarity_defect(um) < 1e-15);
    CHECK(lz3::unitarity_defect(up) < 1e-15);
    // minus node touches only the (2,3) adiabatic block
    CHECK(um.m[0][0] == lz3::cplx(1.0));
    CHECK(um.m[0][1] == lz3::cplx(0.0));
    CHECK(um.m[1][0] == lz3::cplx(0.0));
    // plus node touches only the (1,2) adiabatic block
    CHECK(up.m[2][2] == lz3::cplx(1.0));
    CHECK(up.m[2][0] == lz3::cplx(0.0));
    CHECK(up.m[0][2] == lz3::cplx(0.0));
    // transition magnitudes: |off-diagonal|^2 = p, |diagonal|^2 = q
    CHECK_THAT(std::norm(um.m[1][2]), WithinAbs(n.p, 1e-15));
    CHECK_THAT(std::norm(um.m[1][1]), WithinAbs(n.q, 1e-15));
    CHECK_THAT(std::norm(up.m[0][1]), WithinAbs(n.p, 1e-15));
  }
}

TEST_CASE("zero coupling gives pass-through crossing matrices") {
  const lz3::LZNode n = lz3::make_node(0.0, 1.0, -1.0);
  CHECK(n.p == 1.0);
  CHECK(n.q == 0.0);
  const lz3::CMat3 um = lz3::lz_matrix_minus(n);
  // p = 1: the block is a pure swap (up to sign), no diagonal survival.
  CHECK_THAT(std::abs(um.m[1][2]), WithinAbs(1.0, 1e-15));
  CHECK_THAT(std::abs(um.m[1][1]), WithinAbs(0.0, 1e-15));
}
