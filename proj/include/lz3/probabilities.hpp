#pragma once

// Closed-form transition probabilities: the exact infinite-duration table,
// the finite-window counterintuitive probability with its average/
// oscillating split, near-adiabatic and weak-coupling limits, the full
// finite-window average table, and the time-dependent averages of the
// original (infinite-past) model.

#include <array>
#include <cmath>

#include "lz3/errors.hpp"
#include "lz3/lz.hpp"
#include "lz3/model.hpp"
#include "lz3/propagator.hpp"
#include "lz3/spectral.hpp"

namespace lz3 {

enum class TableKind { do_exact, finite_avg, finite_full, do_time_avg };

inline const char* table_kind_name(TableKind k) {
  switch (k) {
    case TableKind::do_exact:
      return "exact-DO";
    case TableKind::finite_avg:
      return "finite-avg";
    case TableKind::finite_full:
      return "finite-full";
    case TableKind::do_time_avg:
      return "DO-time-avg";
  }
  return "?";
}

struct TransitionTable {
  // P[m][n] = P_{(m+1) -> (n+1)}: start state indexes rows.
  std::array<std::array<double, 3>, 3> P{};
  TableKind kind = TableKind::do_exact;
  // Asymptotic formulas can leave [0, 1+1e-9] outside their validity
  // domain; flagged rather than silently clamped.
  bool out_of_range = false;

  Real3 row_sums() const {
    Real3 s{};
    for (int m = 0; m < 3; ++m) s[m] = P[m][0] + P[m][1] + P[m][2];
    return s;
  }
};

struct ProbabilitySplit {
  double average = 0.0;
  double oscillating = 0.0;
  double total = 0.0;  // = average + oscillating
};

namespace detail {

inline void flag_out_of_range(TransitionTable& t) {
  for (const auto& row : t.P)
    for (double v : row)
      if (v < 0.0 || v > 1.0 + 1e-9) t.out_of_range = true;
}

// Asymptotic 1/T expansions are trustworthy for windows long on both the
// crossing-separation and sweep-rate scales.
inline double validity_scale(const ModelParams& mp) {
  return std::max(crossing_tau(mp), 1.0 / std::sqrt(mp.beta));
}

}  // namespace detail

// Exact infinite-duration transition table. P_{3->1} = 0 identically; rows
// sum to 1 algebraically.
inline TransitionTable do_exact_table(const ModelParams& mp) {
  validate(mp);
  const auto [tm, tp] = crossing_times(mp);
  const LZNode minus = make_node(mp.omega12, mp.beta, tm);
  const LZNode plus = make_node(mp.omega23, mp.beta, tp);
  TransitionTable t;
  t.kind = TableKind::do_exact;
  t.P[0] = {minus.p, minus.q * plus.p, minus.q * plus.q};
  t.P[1] = {minus.q, minus.p * plus.p, minus.p * plus.q};
  t.P[2] = {0.0, plus.q, plus.p};
  detail::flag_out_of_range(t);
  return t;
}

// Counterintuitive transition probability for a symmetric window [-T, T]
// with equal couplings: exact-frame amplitude built from the row-1 frame
// components at +T and the quadrature phases. The average is the
// non-oscillating part of the squared amplitude; everything else is
// assigned to the oscillating part.
inline ProbabilitySplit p31_full(const ModelParams& mp, double T,
                                 double tol = -1.0) {
  validate(mp);
  if (!mp.symmetric_couplings())
    throw error(errc::symmetry_required,
                "counterintuitive closed form needs omega12 == omega23");
  if (!std::isfinite(T) || !(T > 0.0))
    throw error(errc::invalid_argument, "T must be positive and finite");
  if (!(T > crossing_tau(mp)))
    throw error(errc::window_too_short, "need T > tau = delta/beta");
  const SegmentPhases s = build_segments(mp, -T, T, tol);
  const Mat3 f = frame_at(mp, T).f;
  const double f11 = f.m[0][0], f12 = f.m[0][1], f13 = f.m[0][2];
  const double p = s.plus.p, q = s.plus.q, phi = s.plus.phi;
  const double L12_T_tau = s.post.lambda[0] - s.post.lambda[1];
  const double L2_T_tau = s.post.lambda[1];
  const double L3_T_mtau = s.mid.lambda[2] + s.post.lambda[2];
  const double L1_T_mT = s.pre.lambda[0] + s.mid.lambda[0] + s.post.lambda[0];
  const double amp =
      p * f11 * f11 + q * f12 * f12 -
      2.0 * std::sqrt(p * q) * f11 * f12 * std::cos(L12_T_tau + phi) +
      2.0 * std::sqrt(p) * f12 * f13 * std::cos(L2_T_tau - L3_T_mtau) +
      2.0 * std::sqrt(q) * f11 * f13 * std::cos(L1_T_mT + phi);
  ProbabilitySplit r;
  r.total = amp * amp;
  const double a = p * f11 * f11 + q * f12 * f12;
  r.average = a * a + 2.0 * (q * f11 * f11 + p * f12 * f12) * f13 * f13 +
              2.0 * p * q * f11 * f11 * f12 * f12;
  r.oscillating = r.total - r.average;
  return r;
}

namespace detail {

inline double p31_avg_symmetric_terms(const ModelParams& mp, double T,
                                      int terms) {
  const double d = mp.delta, b = mp.beta;
  const LZNode n = make_node(mp.omega12, b, -crossing_tau(mp));
  const double om2 = mp.omega12 * mp.omega12;
  double v = om2 * (om2 * n.p + 4.0 * d * d * n.q) /
             (2.0 * d * d * b * b * T * T);
  if (terms >= 2)
    v += om2 * (om2 * om2 * n.p - 8.0 * d * d * d * d * n.q) /
         (2.0 * d * d * d * b * b * b * T * T * T);
  return v;
}

inline double p31_avg_general_terms(const ModelParams& mp, double T,
                                    int terms) {
  const double d = mp.delta, b = mp.beta;
  const auto [tm, tp] = crossing_times(mp);
  const LZNode nm = make_node(mp.omega12, b, tm);
  const LZNode np = make_node(mp.omega23, b, tp);
  const double o12 = mp.omega12 * mp.omega12;
  const double o23 = mp.omega23 * mp.omega23;
  const double wq = o12 * np.q + o23 * nm.q;
  double v = (o12 * o23 * (nm.p + np.p) + 4.0 * d * d * wq) /
             (4.0 * d * d * b * b * T * T);
  if (terms >= 2)
    v += (o12 * o23 * (o12 * nm.p + o23 * np.p) - 8.0 * d * d * d * d * wq) /
         (4.0 * d * d * d * b * b * b * T * T * T);
  return v;
}

}  // namespace detail

// Two-term 1/T expansion of the average counterintuitive probability for a
// symmetric window; `terms` = 1 keeps the leading 1/T^2 term only. The
// warning flag marks windows short enough that the expansion is marginal
// (the formula is still evaluated: figure sweeps plot it across wide
// ranges).
inline double p31_average_asymptotic(const ModelParams& mp, double T,
                                     int terms = 2, bool* warning = nullptr) {
  validate(mp);
  if (!std::isfinite(T) || !(T > 0.0))
    throw error(errc::invalid_argument, "T must be positive and finite");
  if (terms < 1 || terms > 2)
    throw error(errc::invalid_argument, "terms must be 1 or 2");
  if (warning) *warning = T < 10.0 * detail::validity_scale(mp);
  return mp.symmetric_couplings()
             ? detail::p31_avg_symmetric_terms(mp, T, terms)
             : detail::p31_avg_general_terms(mp, T, terms);
}

// Near-adiabatic limit of p31_full (alpha >> 1).
inline double p31_limit_adiabatic(const ModelParams& mp, double T,
                                  double tol = -1.0,
                                  bool* warning = nullptr) {
  validate(mp);
  if (!mp.symmetric_couplings())
    throw error(errc::symmetry_required, "limit derived for equal couplings");
  if (!std::isfinite(T) || !(T > 0.0))
    throw error(errc::invalid_argument, "T must be positive and finite");
  const LZNode n = make_node(mp.omega12, mp.beta, -crossing_tau(mp));
  if (warning) *warning = n.alpha < 2.0;
  const double L1 = phase_integrals(mp, -T, T, tol).lambda[0];
  const double c = std::cos(L1 + n.phi);
  const double om2 = mp.omega12 * mp.omega12;
  return 4.0 * om2 / (mp.beta * mp.beta * T * T) * c * c;
}

// Weak-coupling limit of p31_full (alpha << 1).
inline double p31_limit_weak(const ModelParams& mp, double T,
                             double tol = -1.0, bool* warning = nullptr) {
  validate(mp);
  if (!mp.symmetric_couplings())
    throw error(errc::symmetry_required, "limit derived for equal couplings");
  if (!std::isfinite(T) || !(T > 0.0))
    throw error(errc::invalid_argument, "T must be positive and finite");
  const auto [tm, tp] = crossing_times(mp);
  const LZNode n = make_node(mp.omega12, mp.beta, tm);
  if (warning) *warning = n.alpha > 0.3;
  const double L2 = phase_integrals(mp, tp, T, tol).lambda[1];
  const double L3 = phase_integrals(mp, tm, T, tol).lambda[2];
  const double c = std::cos(L2 - L3);
  const double om2 = mp.omega12 * mp.omega12;
  const double pref =
      om2 * om2 / (mp.delta * mp.delta * mp.beta * mp.beta * T * T);
  return pref * c * c;
}

// Average transition table for a symmetric window, to leading order in
// 1/T^2. The (1,1)/(3,3), (1,2)/(2,3) and (2,1)/(3,2) entries coincide
// identically and are stored from one evaluation each.
inline TransitionTable finite_avg_table(const ModelParams& mp, double T,
                                        bool* warning = nullptr) {
  validate(mp);
  if (!mp.symmetric_couplings())
    throw error(errc::symmetry_required,
                "average table derived for equal couplings");
  if (!std::isfinite(T) || !(T > 0.0))
    throw error(errc::invalid_argument, "T must be positive and finite");
  if (warning) *warning = T < 10.0 * detail::validity_scale(mp);
  const LZNode n = make_node(mp.omega12, mp.beta, -crossing_tau(mp));
  const double p = n.p, q = n.q;
  const double om2 = mp.omega12 * mp.omega12;
  const double c = om2 / (mp.beta * mp.beta * T * T);
  const double k2 = om2 / (4.0 * mp.delta * mp.delta);
  const double p11 = p + c * (k2 * (q * q - 2.0 * p) + 1.0 - 2.0 * p - p * p);
  const double p12 = p * q + c * (k2 * q * q + 1.0 - 6.0 * p + 7.0 * p * p);
  const double p13 = q * q + 2.0 * c * (k2 * (p - q * q) + 3.0 * p * q - q);
  const double p21 = q + c * (p * p + 4.0 * p - 3.0 - k2 * q * q);
  const double p22 = p * p + 2.0 * c * (1.0 + p - 4.0 * p * p);
  const double p31 = 2.0 * (c * (k2 * p + q));
  TransitionTable t;
  t.kind = TableKind::finite_avg;
  t.P[0] = {p11, p12, p13};
  t.P[1] = {p21, p22, p12};
  t.P[2] = {p31, p21, p11};
  detail::flag_out_of_range(t);
  return t;
}

// Full finite-window table |U_nm|^2 from the analytic diabatic propagator.
inline TransitionTable finite_full_table(const ModelParams& mp, double t_i,
                                         double t_f, double tol = -1.0) {
  const Propagator3 u = diabatic_propagator(mp, t_i, t_f, tol);
  TransitionTable t;
  t.kind = TableKind::finite_full;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) t.P[m][n] = std::norm(u.u.m[n][m]);
  detail::flag_out_of_range(t);
  return t;
}

// Time-dependent average table of the original (infinite-past) model after
// both crossings, to leading order in 1/t^2. The counterintuitive entry is
// exactly half the finite-window one at T = t.
inline TransitionTable do_time_table(const ModelParams& mp, double t,
                                     bool* warning = nullptr) {
  validate(mp);
  if (!mp.symmetric_couplings())
    throw error(errc::symmetry_required,
                "time-average table derived for equal couplings");
  if (!std::isfinite(t))
    throw error(errc::invalid_argument, "t must be finite");
  if (!(t > crossing_tau(mp)))
    throw error(errc::after_crossings_required,
                "averages hold after both crossings: t > tau");
  if (warning) *warning = t < 10.0 * detail::validity_scale(mp);
  const LZNode n = make_node(mp.omega12, mp.beta, -crossing_tau(mp));
  const double p = n.p, q = n.q;
  const double om2 = mp.omega12 * mp.omega12;
  const double c = om2 / (mp.beta * mp.beta * t * t);
  const double k2 = om2 / (4.0 * mp.delta * mp.delta);
  TransitionTable tt;
  tt.kind = TableKind::do_time_avg;
  tt.P[0] = {p + c * (k2 * (q * q - p) - p * p),
             p * q + c * (1.0 - 3.0 * p * q),
             q * q + c * (q * (p - q) + k2 * (p - q * q))};
  tt.P[1] = {q + c * (p * p - q - k2 * q * q),
             p * p + c * (1.0 - 3.0 * p * p),
             p * q + c * (p * (p - q) + k2 * q * q)};
  tt.P[2] = {c * (k2 * p + q), q + c * (p - 2.0 * q),
             p + c * (q - p - k2 * p)};
  detail::flag_out_of_range(tt);
  return tt;
}

// Exact-frame time-dependent counterintuitive probability of the original
// model after both crossings, with its average/oscillating split (general
// couplings).
inline ProbabilitySplit p31_time_split(const ModelParams& mp, double t,
                                       double tol = -1.0) {
  validate(mp);
  if (!std::isfinite(t))
    throw error(errc::invalid_argument, "t must be finite");
  const auto [tm, tp] = crossing_times(mp);
  if (!(t > tp))
    throw error(errc::after_crossings_required,
                "split defined after both crossings: t > tau");
  const LZNode plus = make_node(mp.omega23, mp.beta, tp);
  const Mat3 f = frame_at(mp, t).f;
  const double f11 = f.m[0][0], f12 = f.m[0][1];
  const PhaseIntegrals post = phase_integrals(mp, tp, t, tol);
  const double L12 = post.lambda[0] - post.lambda[1];
  ProbabilitySplit r;
  r.average = plus.q * f11 * f11 + plus.p * f12 * f12;
  r.oscillating = 2.0 * std::sqrt(plus.p * plus.q) * f11 * f12 *
                  std::cos(L12 + plus.phi);
  r.total = r.average + r.oscillating;
  return r;
}

// Large-t asymptotic evaluation of the same split.
inline ProbabilitySplit p31_time_split_asymptotic(const ModelParams& mp,
                                                  double t,
                                                  double tol = -1.0) {
  validate(mp);
  if (!std::isfinite(t))
    throw error(errc::invalid_argument, "t must be finite");
  const auto [tm, tp] = crossing_times(mp);
  if (!(t > tp))
    throw error(errc::after_crossings_required,
                "split defined after both crossings: t > tau");
  const LZNode plus = make_node(mp.omega23, mp.beta, tp);
  const PhaseIntegrals post = phase_integrals(mp, tp, t, tol);
  const double L12 = post.lambda[0] - post.lambda[1];
  const double d = mp.delta, b = mp.beta;
  const double o12 = mp.omega12 * mp.omega12;
  const double o23 = mp.omega23 * mp.omega23;
  ProbabilitySplit r;
  r.average =
      o12 * (4.0 * d * d * plus.q + o23 * plus.p) / (4.0 * d * d * b * b * t * t);
  r.oscillating = -(o12 * mp.omega23 / (d * b * b * t * t)) *
                  std::sqrt(plus.p * plus.q) * std::cos(L12 + plus.phi);
  r.total = r.average + r.oscillating;
  return r;
}

}  // namespace lz3
