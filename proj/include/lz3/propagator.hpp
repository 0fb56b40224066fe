#pragma once

// Dynamical-phase integrals Lambda_k, the diagonal phase matrices M, and
// assembly of the analytic propagator: adiabatic-basis five-factor product
//   U^A(t_f, t_i) = M(t_f,tau) U_LZ(tau) M(tau,-tau) U_LZ(-tau) M(-tau,t_i),
// its closed entrywise form, the symmetric-window reduction, and the
// transformation U = F(t_f) U^A F^T(t_i) to the diabatic basis.
//
// Infinite windows are not representable as a Propagator3 (the dynamical
// phases diverge); the original-DO limit exposes only probabilities, via
// do_adiabatic_columns below and the probability tables built on it.

#include <cmath>
#include <complex>
#include <vector>

#include "lz3/errors.hpp"
#include "lz3/linalg.hpp"
#include "lz3/lz.hpp"
#include "lz3/model.hpp"
#include "lz3/quadrature.hpp"
#include "lz3/spectral.hpp"

namespace lz3 {

struct PhaseIntegrals {
  double t_from = 0.0;
  double t_to = 0.0;
  Real3 lambda = {};  // Lambda_k(t_to, t_from), descending-branch order
};

// Default absolute quadrature tolerance, scaled so that phases of size
// |window| * max|lambda| keep ~1e-10 relative accuracy (tighter absolute
// targets are below double resolution for long windows).
inline double default_phase_tol(const ModelParams& p, double a, double b) {
  const double s_max = std::max({spectral_bound(p, a), spectral_bound(p, b),
                                 spectral_bound(p, 0.0)});
  return 1e-10 * (1.0 + std::abs(b - a) * s_max);
}

inline PhaseIntegrals phase_integrals(const ModelParams& p, double from,
                                      double to, double tol = -1.0) {
  if (!std::isfinite(from) || !std::isfinite(to))
    throw error(errc::invalid_argument, "phase integrals need a finite window");
  validate(p);
  if (tol <= 0.0) tol = default_phase_tol(p, from, to);
  PhaseIntegrals r;
  r.t_from = from;
  r.t_to = to;
  if (from == to) return r;
  const auto [tm, tp] = crossing_times(p);
  auto f = [&p](double t) {
    const Real3 lam = eigenvalues(p, t);
    return std::array<double, 3>{lam[0], lam[1], lam[2]};
  };
  const auto q = integrate_gk<3>(f, from, to, tol, {tm, tp});
  r.lambda = {q.value[0], q.value[1], q.value[2]};
  return r;
}

enum class Basis { diabatic, adiabatic };

struct Propagator3 {
  CMat3 u;
  Basis basis = Basis::diabatic;
  double t_from = 0.0;
  double t_to = 0.0;
};

// The three phase segments delimited by the crossings, plus the two LZ
// nodes. Both propagator assemblies below consume the same instance, so
// their agreement tests index conventions rather than quadrature noise.
struct SegmentPhases {
  LZNode minus, plus;
  PhaseIntegrals pre;   // Lambda_k(-tau, t_i)
  PhaseIntegrals mid;   // Lambda_k(+tau, -tau)
  PhaseIntegrals post;  // Lambda_k(t_f, +tau)
};

inline SegmentPhases build_segments(const ModelParams& p, double t_i,
                                    double t_f, double tol = -1.0) {
  validate(p);
  const auto [tm, tp] = crossing_times(p);
  if (!(t_i < tm) || !(t_f > tp))
    throw error(errc::crossings_outside_window,
                "window must strictly contain both crossings +-" +
                    std::to_string(tp));
  SegmentPhases s{make_node(p.omega12, p.beta, tm),
                  make_node(p.omega23, p.beta, tp),
                  phase_integrals(p, t_i, tm, tol),
                  phase_integrals(p, tm, tp, tol),
                  phase_integrals(p, tp, t_f, tol)};
  return s;
}

// Diagonal adiabatic phase factor M(b,a) = diag(exp(-i Lambda_k(b,a))).
inline CMat3 phase_matrix(const PhaseIntegrals& L) {
  CMat3 m;
  for (int k = 0; k < 3; ++k)
    m.m[k][k] = std::exp(cplx(0.0, -L.lambda[k]));
  return m;
}

// Five-factor product form.
inline CMat3 five_factor_product(const SegmentPhases& s) {
  return phase_matrix(s.post) * lz_matrix_plus(s.plus) * phase_matrix(s.mid) *
         lz_matrix_minus(s.minus) * phase_matrix(s.pre);
}

// Closed entrywise form of the same product.
inline CMat3 closed_form(const SegmentPhases& s) {
  const double sp_p = std::sqrt(s.plus.p), sq_p = std::sqrt(s.plus.q);
  const double sp_m = std::sqrt(s.minus.p), sq_m = std::sqrt(s.minus.q);
  const double php = s.plus.phi, phm = s.minus.phi;
  const Real3& L1 = s.pre.lambda;   // Lambda_k(-tau, t_i)
  const Real3& L2 = s.mid.lambda;   // Lambda_k(tau, -tau)
  const Real3& L3 = s.post.lambda;  // Lambda_k(t_f, tau)
  auto E = [](double phase) { return std::exp(cplx(0.0, -phase)); };
  CMat3 u;
  u.m[0][0] = sq_p * E(php + L1[0] + L2[0] + L3[0]);
  u.m[0][1] = -sp_p * sq_m * E(phm + L3[0] + L2[1] + L1[1]);
  u.m[0][2] = sp_m * sp_p * E(L3[0] + L2[1] + L1[2]);
  u.m[1][0] = sp_p * E(L1[0] + L2[0] + L3[1]);
  u.m[1][1] = sq_m * sq_p * E(phm - php + L1[1] + L2[1] + L3[1]);
  u.m[1][2] = -sp_m * sq_p * E(-php + L1[2] + L2[1] + L3[1]);
  u.m[2][1] = sp_m * E(L1[1] + L2[2] + L3[2]);
  u.m[2][2] = sq_m * E(-phm + L1[2] + L2[2] + L3[2]);
  return u;
}

// Adiabatic-basis analytic propagator; both crossings must lie strictly
// inside the window.
inline Propagator3 analytic_adiabatic_propagator(const ModelParams& p,
                                                 double t_i, double t_f,
                                                 double tol = -1.0) {
  const SegmentPhases s = build_segments(p, t_i, t_f, tol);
  return {five_factor_product(s), Basis::adiabatic, t_i, t_f};
}

// Symmetric-window reduction (equal couplings, window [-T, T]): entries
// built from Lambda_1(T,-T), Lambda_12(T,tau) and Lambda_2(T,tau) -
// Lambda_3(T,-tau) only. Entry (1,3) = p, (2,2) = q, (3,1) = 0 exactly.
inline Propagator3 adiabatic_propagator_symmetric(const ModelParams& p,
                                                  double T,
                                                  double tol = -1.0) {
  validate(p);
  if (!p.symmetric_couplings())
    throw error(errc::symmetry_required,
                "symmetric form requires omega12 == omega23");
  const auto [tm, tp] = crossing_times(p);
  if (!(T > tp))
    throw error(errc::crossings_outside_window,
                "window [-T, T] must contain the crossings: T > tau required");
  const SegmentPhases s = build_segments(p, -T, T, tol);
  const LZNode& n = s.plus;
  const double sp = std::sqrt(n.p), sq = std::sqrt(n.q);
  const double L1_full = s.pre.lambda[0] + s.mid.lambda[0] + s.post.lambda[0];
  const double L12_T_tau = s.post.lambda[0] - s.post.lambda[1];
  const double L2_T_tau = s.post.lambda[1];
  const double L3_T_mtau = s.mid.lambda[2] + s.post.lambda[2];
  auto E = [](double phase) { return std::exp(cplx(0.0, -phase)); };
  CMat3 u;
  u.m[0][0] = sq * E(n.phi + L1_full);
  u.m[0][1] = -sp * sq * E(n.phi + L12_T_tau);
  u.m[0][2] = n.p;
  u.m[1][0] = sp * E(L2_T_tau - L3_T_mtau);
  u.m[1][1] = n.q;
  u.m[1][2] = -sp * sq * E(-n.phi - L12_T_tau);
  u.m[2][1] = sp * E(L3_T_mtau - L2_T_tau);
  u.m[2][2] = sq * E(-n.phi - L1_full);
  return {u, Basis::adiabatic, -T, T};
}

// Adiabatic propagator over a window containing any subset of the
// crossings (used for composition tests and partial evolutions). Crossings
// must not sit on the window boundary.
inline Propagator3 sub_window_adiabatic_propagator(const ModelParams& p,
                                                   double a, double b,
                                                   double tol = -1.0) {
  validate(p);
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
    throw error(errc::empty_window, "need finite a < b");
  const auto [tm, tp] = crossing_times(p);
  if (a == tm || a == tp || b == tm || b == tp)
    throw error(errc::crossings_outside_window,
                "crossing sits on a sub-window boundary");
  CMat3 u = CMat3::identity();
  double cursor = a;
  for (double cross : {tm, tp}) {
    if (cross > a && cross < b) {
      u = phase_matrix(phase_integrals(p, cursor, cross, tol)) * u;
      u = (cross == tm ? lz_matrix_minus(make_node(p.omega12, p.beta, tm))
                       : lz_matrix_plus(make_node(p.omega23, p.beta, tp))) *
          u;
      cursor = cross;
    }
  }
  u = phase_matrix(phase_integrals(p, cursor, b, tol)) * u;
  return {u, Basis::adiabatic, a, b};
}

// Diabatic-basis analytic propagator U = F(t_f) U^A F^T(t_i). Finite
// windows only; the original-DO limit exposes probabilities instead (see
// do_adiabatic_columns).
inline Propagator3 diabatic_propagator(const ModelParams& p, double t_i,
                                       double t_f, double tol = -1.0) {
  if (!std::isfinite(t_i) || !std::isfinite(t_f))
    throw error(errc::invalid_argument,
                "infinite windows expose probabilities only, not a "
                "Propagator3; use the transition-table API");
  const Propagator3 ua = analytic_adiabatic_propagator(p, t_i, t_f, tol);
  const Mat3 ff = frame_at(p, t_f).f;
  const Mat3 fi = frame_at(p, t_i).f;
  return {to_complex(ff) * ua.u * to_complex(transpose(fi)), Basis::diabatic,
          t_i, t_f};
}

inline Propagator3 sub_window_diabatic_propagator(const ModelParams& p,
                                                  double a, double b,
                                                  double tol = -1.0) {
  const Propagator3 ua = sub_window_adiabatic_propagator(p, a, b, tol);
  const Mat3 ff = frame_at(p, b).f;
  const Mat3 fi = frame_at(p, a).f;
  return {to_complex(ff) * ua.u * to_complex(transpose(fi)), Basis::diabatic,
          a, b};
}

// Original-DO limit (t_i = -inf): the adiabatic propagator columns with the
// per-column divergent phase factored out. Column l is the adiabatic-basis
// image of the state that starts in phi_l at t -> -inf; the removed phase
// is unobservable in any probability. Requires t past both crossings.
inline CMat3 do_adiabatic_columns(const ModelParams& p, double t,
                                  double tol = -1.0) {
  validate(p);
  const auto [tm, tp] = crossing_times(p);
  if (!(t > tp))
    throw error(errc::after_crossings_required,
                "original-DO columns need t > tau");
  const LZNode minus = make_node(p.omega12, p.beta, tm);
  const LZNode plus = make_node(p.omega23, p.beta, tp);
  const PhaseIntegrals mid = phase_integrals(p, tm, tp, tol);
  const PhaseIntegrals post = phase_integrals(p, tp, t, tol);
  const double sp_p = std::sqrt(plus.p), sq_p = std::sqrt(plus.q);
  const double sp_m = std::sqrt(minus.p), sq_m = std::sqrt(minus.q);
  const double php = plus.phi, phm = minus.phi;
  const double L1_t_tau = post.lambda[0];
  const double L2_t_tau = post.lambda[1];
  const double L2_tau_mtau = mid.lambda[1];
  const double L2_t_mtau = L2_tau_mtau + L2_t_tau;
  const double L3_t_mtau = mid.lambda[2] + post.lambda[2];
  auto E = [](double phase) { return std::exp(cplx(0.0, -phase)); };
  CMat3 u;
  // column 1: started in phi_1 (diabatic psi_3)
  u.m[0][0] = sq_p * E(php + L1_t_tau);
  u.m[1][0] = sp_p * E(L2_t_tau);
  // column 2: started in phi_2 (diabatic -psi_1)
  u.m[0][1] = -sp_p * sq_m * E(phm + L1_t_tau + L2_tau_mtau);
  u.m[1][1] = sq_m * sq_p * E(phm - php + L2_t_mtau);
  u.m[2][1] = sp_m * E(L3_t_mtau);
  // column 3: started in phi_3 (diabatic psi_2)
  u.m[0][2] = sp_m * sp_p * E(L1_t_tau + L2_tau_mtau);
  u.m[1][2] = -sp_m * sq_p * E(-php + L2_t_mtau);
  u.m[2][2] = sq_m * E(-phm + L3_t_mtau);
  return u;
}

}  // namespace lz3
