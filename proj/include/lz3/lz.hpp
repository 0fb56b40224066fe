#pragma once

// Landau-Zener node quantities for the two crossings: the dimensionless
// parameter alpha = coupling/sqrt(beta), the no-transition probability
// p = exp(-2 pi alpha^2), and the Stokes-type LZ phase
//   phi = arg Gamma(1 - i alpha^2) + pi/4 + alpha^2 (ln alpha^2 - 1),
// together with the 3x3 crossing matrices acting on the adiabatic states.

#include <cmath>
#include <complex>

#include "lz3/errors.hpp"
#include "lz3/linalg.hpp"

namespace lz3 {

namespace detail {

inline constexpr double pi = 3.14159265358979323846;

// Lanczos approximation (g = 7, 9 terms) of log Gamma, valid for
// Re z >= 0.5. Only the region z = 1 - ix is needed here, so no
// reflection branch.
inline cplx log_gamma_lanczos(cplx z) {
  static constexpr double coeff[9] = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,       -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
  z -= 1.0;
  cplx acc = coeff[0];
  for (int i = 1; i < 9; ++i) acc += coeff[i] / (z + static_cast<double>(i));
  const cplx t = z + 7.5;  // z + g + 0.5
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t +
         std::log(acc);
}

// Binet (Stirling) correction sum for z = 1 - ix: the imaginary part of
// sum_n B_{2n} / (2n (2n-1) z^{2n-1}). Coefficients B_{2n}/((2n)(2n-1)).
inline double binet_im_sum(double x) {
  static constexpr double coeff[8] = {
      1.0 / 12.0,        -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0,
      1.0 / 1188.0,      -691.0 / 360360.0, 1.0 / 156.0,
      -3617.0 / 122400.0};
  const cplx zinv = cplx(1.0, x) / (1.0 + x * x);  // 1/(1 - ix)
  const cplx zinv2 = zinv * zinv;
  cplx w = zinv;
  double s = 0.0;
  for (double c : coeff) {
    s += c * w.imag();
    w *= zinv2;
  }
  return s;
}

// Cancellation-free form of phi(x) = argGamma(1-ix) + pi/4 + x(ln x - 1)
// for large x, where every term is O(1/x):
//   phi = atan(1/x)/2 - (x/2) log1p(1/x^2) + Im Binet sum.
inline double lz_phase_from_xsq_large(double x) {
  return 0.5 * std::atan(1.0 / x) - 0.5 * x * std::log1p(1.0 / (x * x)) +
         binet_im_sum(x);
}

}  // namespace detail

// arg Gamma(1 - i x). Odd in x; continuous; 0 at x = 0. Absolute accuracy
// ~1e-13 over |x| <= 100 (Lanczos below |x| = 10, Binet series above).
inline double arg_gamma_one_minus_i_x(double x) {
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -arg_gamma_one_minus_i_x(-x);
  if (x < 10.0)
    return detail::log_gamma_lanczos(cplx(1.0, -x)).imag();
  return detail::lz_phase_from_xsq_large(x) - detail::pi / 4.0 -
         x * (std::log(x) - 1.0);
}

// phi(alpha) per the LZ-phase formula, with the removable singularity at
// alpha = 0 evaluated as the limit pi/4.
inline double lz_phase(double alpha) {
  const double x = alpha * alpha;  // alpha^2 is the Gamma argument
  if (x >= 10.0) return detail::lz_phase_from_xsq_large(x);
  const double log_term = x < 1e-300 ? 0.0 : x * (std::log(x) - 1.0);
  return arg_gamma_one_minus_i_x(x) + detail::pi / 4.0 + log_term;
}

struct LZNode {
  double t_cross = 0.0;  // -tau or +tau
  double alpha = 0.0;    // coupling / sqrt(beta)
  double p = 1.0;        // no-transition probability
  double q = 0.0;        // 1 - p
  double phi = 0.0;      // LZ phase
};

inline LZNode make_node(double coupling, double beta, double t_cross) {
  if (std::isnan(coupling) || coupling < 0.0)
    throw error(errc::negative_coupling, "coupling must be >= 0");
  if (std::isnan(beta) || beta <= 0.0)
    throw error(errc::non_positive_beta, "beta must be > 0");
  LZNode n;
  n.t_cross = t_cross;
  n.alpha = coupling / std::sqrt(beta);
  n.p = std::exp(-2.0 * detail::pi * n.alpha * n.alpha);
  n.q = 1.0 - n.p;
  n.phi = lz_phase(n.alpha);
  return n;
}

// Crossing matrix at -tau: 2x2 LZ block on adiabatic states (2,3).
inline CMat3 lz_matrix_minus(const LZNode& n) {
  const double sp = std::sqrt(n.p), sq = std::sqrt(n.q);
  CMat3 u;
  u.m[0][0] = 1.0;
  u.m[1][1] = sq * std::exp(cplx(0.0, -n.phi));
  u.m[1][2] = -sp;
  u.m[2][1] = sp;
  u.m[2][2] = sq * std::exp(cplx(0.0, n.phi));
  return u;
}

// Crossing matrix at +tau: 2x2 LZ block on adiabatic states (1,2).
inline CMat3 lz_matrix_plus(const LZNode& n) {
  const double sp = std::sqrt(n.p), sq = std::sqrt(n.q);
  CMat3 u;
  u.m[0][0] = sq * std::exp(cplx(0.0, -n.phi));
  u.m[0][1] = -sp;
  u.m[1][0] = sp;
  u.m[1][1] = sq * std::exp(cplx(0.0, n.phi));
  u.m[2][2] = 1.0;
  return u;
}

}  // namespace lz3
