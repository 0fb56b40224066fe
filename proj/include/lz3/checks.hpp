#pragma once

// Named cross-check battery behind the `validate` subcommand: algebraic and
// symmetry invariants (quick) plus analytic-vs-oracle comparisons (full).
// All randomness is seeded, so every run checks the same points.

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lz3/integrator.hpp"
#include "lz3/linalg.hpp"
#include "lz3/lz.hpp"
#include "lz3/model.hpp"
#include "lz3/probabilities.hpp"
#include "lz3/propagator.hpp"
#include "lz3/spectral.hpp"

namespace lz3 {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;   // worst observed deviation
  double tolerance = 0.0;
  std::string detail;
};

namespace detail {

inline std::string check_detail(double worst, double tol) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::scientific << "worst " << worst << " (tol " << tol << ")";
  return ss.str();
}

inline CheckResult make_check(const std::string& name, double worst,
                              double tol) {
  CheckResult c;
  c.name = name;
  c.worst = worst;
  c.tolerance = tol;
  c.passed = worst <= tol;
  c.detail = check_detail(worst, tol);
  return c;
}

inline ModelParams random_params(std::mt19937& rng, bool symmetric) {
  std::uniform_real_distribution<double> coupling(0.3, 2.0);
  std::uniform_real_distribution<double> splitting(0.4, 2.0);
  std::uniform_real_distribution<double> slope(0.5, 2.0);
  ModelParams p;
  p.omega12 = coupling(rng);
  p.omega23 = symmetric ? p.omega12 : coupling(rng);
  p.delta = splitting(rng);
  p.beta = slope(rng);
  return p;
}

// Random window half-width comfortably beyond both crossings.
inline double random_half_width(std::mt19937& rng, const ModelParams& p) {
  std::uniform_real_distribution<double> u(1.5, 4.0);
  return u(rng) * std::max(crossing_tau(p), 1.0 / std::sqrt(p.beta)) + 2.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quick battery: algebra, symmetries, phase references. No ODE runs.

inline std::vector<CheckResult> run_quick_checks() {
  std::vector<CheckResult> out;
  std::mt19937 rng(20260817u);

  {  // reference values of arg Gamma(1 - i x), cross-computed independently
    const double xs[] = {0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0};
    const double refs[] = {0.1382373401412416,   0.2440582989054278,
                           0.3016403204675332,   -0.1296463163097883,
                           -3.81589857461492448, -13.8029129742299007,
                           -72.8185417325709856, -361.3015834260953946};
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double got = arg_gamma_one_minus_i_x(xs[i]);
      worst = std::max(worst,
                       std::abs(got - refs[i]) / std::max(1.0, std::abs(refs[i])));
    }
    out.push_back(detail::make_check("gamma-phase-reference", worst, 1e-12));
  }

  {  // crossing phase endpoints: phi(0) = pi/4, strong-coupling reference
    double worst = std::abs(lz_phase(0.0) - detail::pi / 4.0);
    worst = std::max(worst, std::abs(lz_phase(3.0) - 0.0092630832212480));
    out.push_back(detail::make_check("crossing-phase-reference", worst, 1e-12));
  }

  {  // infinite-duration table: rows sum to 1, entries in [0, 1]
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const ModelParams p = detail::random_params(rng, false);
      const TransitionTable t = do_exact_table(p);
      for (const double s : t.row_sums())
        worst = std::max(worst, std::abs(s - 1.0));
      for (const auto& row : t.P)
        for (const double v : row)
          worst = std::max(worst, std::max(-v, v - 1.0));
    }
    out.push_back(detail::make_check("exact-table-row-sums", worst, 1e-14));
  }

  {  // time-resolved average is exactly half the finite-window average
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const ModelParams p = detail::random_params(rng, true);
      const double t = detail::random_half_width(rng, p);
      const double a = do_time_table(p, t).P[2][0];
      const double b = finite_avg_table(p, t).P[2][0];
      worst = std::max(worst, std::abs(2.0 * a - b) / std::max(1.0, b));
    }
    out.push_back(detail::make_check("half-relation", worst, 1e-14));
  }

  {  // eigenvalue reflection: lambda_1(-T) = -lambda_3(T), lambda_2 odd
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const ModelParams p = detail::random_params(rng, true);
      const double T = detail::random_half_width(rng, p);
      const Real3 lp = eigenvalues(p, T), lm = eigenvalues(p, -T);
      worst = std::max({worst, std::abs(lm[0] + lp[2]),
                        std::abs(lm[1] + lp[1]), std::abs(lm[2] + lp[0])});
    }
    out.push_back(detail::make_check("eigenvalue-reflection", worst, 1e-10));
  }

  {  // frame reflection relation F(-T) from F(T)
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const ModelParams p = detail::random_params(rng, true);
      const double T = detail::random_half_width(rng, p);
      const Mat3 predicted = symmetric_frame_relation(p, frame_at(p, T));
      worst = std::max(worst, max_abs_diff(predicted, frame_at(p, -T).f));
    }
    out.push_back(detail::make_check("frame-reflection", worst, 1e-10));
  }

  {  // the middle adiabatic phase integrates to zero over [-T, T]
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const ModelParams p = detail::random_params(rng, true);
      const double T = detail::random_half_width(rng, p);
      worst = std::max(worst, std::abs(phase_integrals(p, -T, T).lambda[1]));
    }
    out.push_back(detail::make_check("middle-phase-odd", worst, 1e-10));
  }

  {  // eigenvalues satisfy the characteristic cubic
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const ModelParams p = detail::random_params(rng, false);
      std::uniform_real_distribution<double> ut(-5.0, 5.0);
      const double t = ut(rng);
      const CubicCoeffs c = characteristic_cubic(p, t);
      for (const double lam : eigenvalues(p, t)) {
        const double r = ((lam + c.a) * lam + c.b) * lam + c.c;
        const double scale = std::max(1.0, std::abs(lam) * std::abs(lam) *
                                               std::abs(lam));
        worst = std::max(worst, std::abs(r) / scale);
      }
    }
    out.push_back(detail::make_check("characteristic-roots", worst, 1e-10));
  }

  {  // five-factor product equals the closed-form propagator entrywise
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const ModelParams p = detail::random_params(rng, false);
      const double tau = crossing_tau(p);
      std::uniform_real_distribution<double> pad(0.5, 3.0);
      const SegmentPhases s =
          build_segments(p, -tau - pad(rng), tau + pad(rng));
      worst =
          std::max(worst, max_abs_diff(five_factor_product(s), closed_form(s)));
    }
    out.push_back(detail::make_check("closed-form-factorization", worst,
                                     1e-12));
  }

  {  // analytic diabatic propagator is unitary
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const ModelParams p = detail::random_params(rng, false);
      const double tau = crossing_tau(p);
      std::uniform_real_distribution<double> pad(0.5, 3.0);
      const Propagator3 u =
          diabatic_propagator(p, -tau - pad(rng), tau + pad(rng));
      worst = std::max(worst, unitarity_defect(u.u));
    }
    out.push_back(detail::make_check("analytic-unitarity", worst, 1e-10));
  }

  {  // regularized infinite-past columns stay unitary
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const ModelParams p = detail::random_params(rng, false);
      const double t = crossing_tau(p) + 2.0;
      worst = std::max(worst, unitarity_defect(do_adiabatic_columns(p, t)));
    }
    out.push_back(detail::make_check("infinite-past-columns-unitary", worst,
                                     1e-10));
  }

  {  // general-coupling average formula reduces to the symmetric one
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const ModelParams p = detail::random_params(rng, true);
      const double T = detail::random_half_width(rng, p);
      for (int terms = 1; terms <= 2; ++terms) {
        const double g = detail::p31_avg_general_terms(p, T, terms);
        const double s = detail::p31_avg_symmetric_terms(p, T, terms);
        worst = std::max(worst, std::abs(g - s) / std::max(1e-30, std::abs(s)));
      }
    }
    out.push_back(detail::make_check("average-general-vs-symmetric", worst,
                                     1e-12));
  }

  return out;
}

// ---------------------------------------------------------------------------
// Full battery: quick checks plus oracle (numeric integration) comparisons.

inline std::vector<CheckResult> run_full_checks() {
  std::vector<CheckResult> out = run_quick_checks();
  ModelParams p;  // omega = delta = beta = 1 reference point
  const double rtol = 1e-10, atol = 1e-12;

  {  // numeric propagator unitarity
    const Propagator3 u = numeric_propagator(p, -12.0, 12.0, rtol, atol);
    out.push_back(
        detail::make_check("numeric-unitarity", unitarity_defect(u.u), 1e-8));
  }

  {  // norm drift of a state integration
    StateVector s;
    s.amplitudes = {cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};
    const IntegrationResult r = integrate(p, s, -20.0, 20.0, rtol, atol);
    out.push_back(detail::make_check("numeric-norm-drift", r.norm_drift,
                                     1e-9));
  }

  {  // adiabatic-basis integration agrees with the diabatic one
    const double a = -8.0, b = 8.0;
    const Propagator3 ud = numeric_propagator(p, a, b, rtol, atol);
    const Propagator3 ua =
        numeric_propagator(p, a, b, rtol, atol, Basis::adiabatic);
    const CMat3 transformed =
        to_complex(frame_at(p, b).f) * ua.u *
        to_complex(transpose(frame_at(p, a).f));
    out.push_back(detail::make_check(
        "basis-equivalence", max_abs_diff(transformed, ud.u), 1e-6));
  }

  {  // closed-form counterintuitive probability vs the oracle at T = 10
    const double T = 10.0;
    const double analytic = p31_full(p, T).total;
    const Propagator3 u = numeric_propagator(p, -T, T, rtol, atol);
    const double numeric = std::norm(u.u.m[0][2]);
    out.push_back(detail::make_check("full-formula-vs-oracle",
                                     std::abs(analytic - numeric), 1e-2));
  }

  {  // emulated infinite window: forbidden counterintuitive transfer
    const DoEmulation e = emulate_do_start(p, 3, {20.0, 40.0}, rtol, atol);
    out.push_back(detail::make_check("infinite-window-suppression",
                                     std::abs(e.extrapolated[0]), 1e-3));
  }

  {  // emulated infinite window: first-row probabilities
    const DoEmulation e = emulate_do_start(p, 1, {20.0, 40.0}, rtol, atol);
    const double pp = std::exp(-2.0 * detail::pi), q = 1.0 - pp;
    const Real3 want{pp, q * pp, q * q};
    double worst = 0.0;
    for (int k = 0; k < 3; ++k)
      worst = std::max(worst, std::abs(e.extrapolated[k] - want[k]));
    out.push_back(detail::make_check("infinite-window-first-row", worst,
                                     1e-3));
  }

  {  // asymptotic time-resolved average approaches the exact-frame one
     // (relative deviation shrinks like 2*delta/(beta*t))
    const double t = 50.0;
    const double exact = p31_time_split(p, t).average;
    const double asym = p31_time_split_asymptotic(p, t).average;
    out.push_back(detail::make_check(
        "time-average-asymptotics", std::abs(asym - exact) / exact, 0.06));
  }

  return out;
}

}  // namespace lz3
