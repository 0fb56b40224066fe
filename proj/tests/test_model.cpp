// Model parameters: validation contract, Hamiltonian structure, crossing
// geometry, spectral bound, and the config-file / time-value parsers.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>

#include "lz3/model.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

lz3::errc thrown_code(void (*f)(const lz3::ModelParams&),
                      const lz3::ModelParams& p) {
  try {
    f(p);
  } catch (const lz3::error& e) {
    return e.code();
  }
  throw std::runtime_error("expected lz3::error");
}
}  // namespace

TEST_CASE("validate accepts the defaults and flags each bad field") {
  lz3::ModelParams p;
  CHECK_NOTHROW(lz3::validate(p));

  p = {};
  p.delta = 0.0;
  CHECK(thrown_code(lz3::validate, p) == lz3::errc::non_positive_delta);
  p = {};
  p.delta = std::nan("");
  CHECK(thrown_code(lz3::validate, p) == lz3::errc::non_positive_delta);
  p = {};
  p.beta = -1.0;
  CHECK(thrown_code(lz3::validate, p) == lz3::errc::non_positive_beta);
  p = {};
  p.omega12 = -0.5;
  CHECK(thrown_code(lz3::validate, p) == lz3::errc::negative_coupling);
  p = {};
  p.omega23 = -0.5;
  CHECK(thrown_code(lz3::validate, p) == lz3::errc::negative_coupling);
  p = {};
  p.t_start = 3.0;
  p.t_end = 3.0;
  CHECK(thrown_code(lz3::validate, p) == lz3::errc::empty_window);
  p = {};
  p.t_start = 2.0;
  p.t_end = -2.0;
  CHECK(thrown_code(lz3::validate, p) == lz3::errc::empty_window);
}

TEST_CASE("zero couplings are legal (bare crossings)") {
  lz3::ModelParams p;
  p.omega12 = 0.0;
  p.omega23 = 0.0;
  CHECK_NOTHROW(lz3::validate(p));
  CHECK(p.symmetric_couplings());
}

TEST_CASE("crossing times are -tau and +tau with tau = delta/beta") {
  lz3::ModelParams p;
  p.delta = 3.0;
  p.beta = 2.0;
  CHECK_THAT(lz3::crossing_tau(p), WithinRel(1.5, 1e-15));
  const auto [tm, tp] = lz3::crossing_times(p);
  CHECK(tm == -1.5);
  CHECK(tp == 1.5);
  CHECK(tm < tp);
}

TEST_CASE("Hamiltonian has the three-level crossing structure") {
  lz3::ModelParams p;
  p.omega12 = 0.7;
  p.omega23 = 1.3;
  p.delta = 2.0;
  p.beta = 0.5;
  const double t = 1.7;
  const lz3::Mat3 h = lz3::hamiltonian_at(p, t);
  CHECK(h.m[0][0] == -p.delta);
  CHECK(h.m[1][1] == p.beta * t);
  CHECK(h.m[2][2] == p.delta);
  CHECK(h.m[0][1] == p.omega12);
  CHECK(h.m[1][2] == p.omega23);
  CHECK(h.m[0][2] == 0.0);
  // symmetric
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(h.m[i][j] == h.m[j][i]);
  // diabatic energies -delta and +delta cross the slanted level beta*t at
  // the crossing times
  const auto [tm, tp] = lz3::crossing_times(p);
  CHECK_THAT(p.beta * tm, WithinAbs(-p.delta, 1e-15));
  CHECK_THAT(p.beta * tp, WithinAbs(p.delta, 1e-15));
}

TEST_CASE("spectral bound dominates the Gershgorin row sums") {
  lz3::ModelParams p;
  p.omega12 = 0.9;
  p.omega23 = 1.8;
  p.delta = 1.2;
  p.beta = 0.8;
  for (double t : {-11.0, -1.0, 0.0, 2.5, 40.0}) {
    CAPTURE(t);
    const lz3::Mat3 h = lz3::hamiltonian_at(p, t);
    const double bound = lz3::spectral_bound(p, t);
    for (int i = 0; i < 3; ++i) {
      double row = 0.0;
      for (int j = 0; j < 3; ++j) row += std::abs(h.m[i][j]);
      CHECK(bound >= row - 1e-12);
    }
  }
}

TEST_CASE("parse_time_value handles signed infinities and numbers") {
  CHECK(lz3::parse_time_value("inf", "to") == kInf);
  CHECK(lz3::parse_time_value("+inf", "to") == kInf);
  CHECK(lz3::parse_time_value("-inf", "from") == -kInf);
  CHECK(lz3::parse_time_value("2.5", "to") == 2.5);
  CHECK(lz3::parse_time_value("-1e3", "from") == -1000.0);
  CHECK_THROWS_AS(lz3::parse_time_value("twelve", "to"), lz3::error);
  try {
    lz3::parse_time_value("", "from");
    FAIL("expected throw");
  } catch (const lz3::error& e) {
    CHECK(e.code() == lz3::errc::invalid_argument);
  }
}

TEST_CASE("parse_config_text reads key=value with comments and blanks") {
  const auto kv = lz3::parse_config_text(
      "# model setup\n"
      "omega = 1.5\n"
      "\n"
      "delta=2.0   # trailing comment\n"
      "  beta  =  0.5\n"
      "from = -inf\n");
  CHECK(kv.at("omega") == "1.5");
  CHECK(kv.at("delta") == "2.0");
  CHECK(kv.at("beta") == "0.5");
  CHECK(kv.at("from") == "-inf");
  CHECK(kv.size() == 4);
}

TEST_CASE("parse_config_text reports the offending line") {
  try {
    lz3::parse_config_text("omega = 1\nthis-has-no-equals\n");
    FAIL("expected throw");
  } catch (const lz3::error& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  CHECK_THROWS_AS(lz3::parse_config_text("= 1.5\n"), lz3::error);
}

TEST_CASE("apply_model_config maps keys onto parameters") {
  lz3::ModelParams p;
  lz3::apply_model_config(
      lz3::parse_config_text("omega12 = 0.4\nomega23 = 0.6\ndelta = 2\n"
                             "beta = 4\nfrom = -3\nto = inf\n"),
      p);
  CHECK(p.omega12 == 0.4);
  CHECK(p.omega23 == 0.6);
  CHECK(p.delta == 2.0);
  CHECK(p.beta == 4.0);
  CHECK(p.t_start == -3.0);
  CHECK(p.t_end == kInf);

  // "omega" sets both couplings at once.
  lz3::apply_model_config(lz3::parse_config_text("omega = 1.25\n"), p);
  CHECK(p.omega12 == 1.25);
  CHECK(p.omega23 == 1.25);

  // Unrelated keys are left for the caller to vet.
  lz3::ModelParams q;
  CHECK_NOTHROW(lz3::apply_model_config(
      lz3::parse_config_text("output = x.csv\n"), q));
  CHECK(q.omega12 == 1.0);
}

TEST_CASE("symmetric_case requires equal couplings and a [-T, T] window") {
  lz3::ModelParams p;
  CHECK(p.symmetric_couplings());
  CHECK_FALSE(p.finite_window());
  CHECK_FALSE(p.symmetric_case());
  p.t_start = -5.0;
  p.t_end = 5.0;
  CHECK(p.symmetric_case());
  p.t_end = 6.0;
  CHECK_FALSE(p.symmetric_case());
  p.t_end = 5.0;
  p.omega23 = 2.0;
  CHECK_FALSE(p.symmetric_case());
}
