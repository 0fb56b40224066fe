#pragma once

// Adiabatic spectrum of the three-state crossing Hamiltonian: closed-form
// eigenvalues from the trigonometric solution of the characteristic cubic,
// and the orthogonal eigenvector frame F(t) whose columns are the adiabatic
// states phi_k ordered by descending eigenvalue (lambda_1 > lambda_2 >
// lambda_3).
//
// Sign convention: eigenvector components are taken directly from the
// closed-form component formulas
//   f_1k ∝ omega12 (lambda_k - delta),
//   f_2k ∝ lambda_k^2 - delta^2,
//   f_3k ∝ omega23 (lambda_k + delta),
// normalized by the positive Euclidean norm. For positive couplings this
// yields a frame that is continuous in t and matches the standard
// large-|t| asymptotics without any sign bookkeeping.

#include <array>
#include <cmath>

#include "lz3/errors.hpp"
#include "lz3/linalg.hpp"
#include "lz3/model.hpp"

namespace lz3 {

// Characteristic polynomial lambda^3 + a lambda^2 + b lambda + c of H(t).
struct CubicCoeffs {
  double a, b, c;
};

inline CubicCoeffs characteristic_cubic(const ModelParams& p, double t) {
  const double d2 = p.delta * p.delta;
  return {
      -p.beta * t,
      -(d2 + p.omega12 * p.omega12 + p.omega23 * p.omega23),
      p.delta *
          (p.omega12 * p.omega12 - p.omega23 * p.omega23 + p.delta * p.beta * t),
  };
}

// Descending eigenvalues of H(t) via the trigonometric (Viete) solution.
// H is real symmetric, so all roots are real and the acos argument lies in
// [-1, 1] up to rounding; it is clamped.
inline Real3 eigenvalues(const ModelParams& p, double t) {
  const auto [a, b, c] = characteristic_cubic(p, t);
  const double s = std::sqrt(a * a - 3.0 * b);
  double cosarg = -(2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / (2.0 * s * s * s);
  cosarg = std::clamp(cosarg, -1.0, 1.0);
  const double theta = std::acos(cosarg);
  const double pi = 3.14159265358979323846;
  const double l1 = -a / 3.0 + 2.0 * s / 3.0 * std::cos(theta / 3.0);
  const double l2 = -a / 3.0 - 2.0 * s / 3.0 * std::cos((theta + pi) / 3.0);
  const double l3 = -a / 3.0 - 2.0 * s / 3.0 * std::cos((theta - pi) / 3.0);
  return {l1, l2, l3};
}

struct AdiabaticFrame {
  double t = 0.0;
  Real3 lambda{};  // descending
  Mat3 f;          // columns f.m[n][k] = <psi_n | phi_k>
};

namespace detail {

// Decoupled-limit eigenvector for an eigenvalue that coincides with one of
// the diabatic energies (possible only when a coupling vanishes). Signs are
// the limits of the raw component formulas as the coupling goes to 0+.
inline Real3 decoupled_eigenvector(const ModelParams& p, double t,
                                   double lambda) {
  const double d_minus = std::abs(lambda + p.delta);
  const double d_plus = std::abs(lambda - p.delta);
  const double d_mid = std::abs(lambda - p.beta * t);
  if (d_minus <= d_plus && d_minus <= d_mid) return {-1.0, 0.0, 0.0};
  if (d_plus <= d_mid) return {0.0, 0.0, 1.0};
  return {0.0, 1.0, 0.0};
}

}  // namespace detail

// Instantaneous eigenframe. Throws if two eigenvalues are (numerically)
// degenerate, which for this Hamiltonian requires a vanishing coupling at
// the corresponding crossing instant.
inline AdiabaticFrame frame_at(const ModelParams& p, double t) {
  AdiabaticFrame fr;
  fr.t = t;
  fr.lambda = eigenvalues(p, t);
  const double scale =
      std::max({1.0, std::abs(fr.lambda[0]), std::abs(fr.lambda[2])});
  if (fr.lambda[0] - fr.lambda[1] < 1e-12 * scale ||
      fr.lambda[1] - fr.lambda[2] < 1e-12 * scale)
    throw error(errc::degenerate_eigenvalue,
                "eigenvalue gap below 1e-12 at t = " + std::to_string(t));
  const double d2 = p.delta * p.delta;
  for (int k = 0; k < 3; ++k) {
    const double lam = fr.lambda[k];
    Real3 v = {p.omega12 * (lam - p.delta), lam * lam - d2,
               p.omega23 * (lam + p.delta)};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n < 1e-13 * scale * scale) {
      // raw formula degenerates: eigenvalue sits on a decoupled diabatic
      // energy; use the closed-form limit instead
      v = detail::decoupled_eigenvector(p, t, lam);
      for (int n_ = 0; n_ < 3; ++n_) fr.f.m[n_][k] = v[n_];
    } else {
      for (int n_ = 0; n_ < 3; ++n_) fr.f.m[n_][k] = v[n_] / n;
    }
  }
  return fr;
}

// F(t -> -inf): phi_1 -> psi_3, phi_2 -> -psi_1, phi_3 -> psi_2.
inline Mat3 frame_at_minus_infinity() {
  Mat3 f;
  f.m[0][1] = -1.0;
  f.m[1][2] = 1.0;
  f.m[2][0] = 1.0;
  return f;
}

// F(t -> +inf): phi_1 -> psi_2, phi_2 -> psi_3, phi_3 -> -psi_1.
inline Mat3 frame_at_plus_infinity() {
  Mat3 f;
  f.m[1][0] = 1.0;
  f.m[2][1] = 1.0;
  f.m[0][2] = -1.0;
  return f;
}

// For equal couplings the spectrum is odd in t; the frame at -T follows
// from the frame at +T by reversing the eigenvalue order with alternating
// column signs. Returns the predicted F(-T) given F(T).
inline Mat3 symmetric_frame_relation(const ModelParams& p,
                                     const AdiabaticFrame& frame_at_T) {
  if (!p.symmetric_couplings())
    throw error(errc::symmetry_not_applicable,
                "frame symmetry requires omega12 == omega23");
  const Mat3& f = frame_at_T.f;
  Mat3 r;
  for (int k = 0; k < 3; ++k) {
    r.m[0][k] = -f.m[2][2 - k];
    r.m[1][k] = f.m[1][2 - k];
    r.m[2][k] = -f.m[0][2 - k];
  }
  return r;
}

// nu_kl(t) = <phi_k | d/dt phi_l>, central finite difference with step h.
// Antisymmetric up to O(h^2).
inline Mat3 nonadiabatic_couplings(const ModelParams& p, double t,
                                   double h = 1e-6) {
  if (!(h > 0.0))
    throw error(errc::invalid_argument, "finite-difference step must be > 0");
  const Mat3 f0 = frame_at(p, t).f;
  const Mat3 fp = frame_at(p, t + h).f;
  const Mat3 fm = frame_at(p, t - h).f;
  Mat3 nu;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      double s = 0.0;
      for (int n = 0; n < 3; ++n)
        s += f0.m[n][k] * (fp.m[n][l] - fm.m[n][l]) / (2.0 * h);
      nu.m[k][l] = s;
    }
  return nu;
}

// Large positive time expansions (beta t >> delta, omega).
inline Real3 eigenvalues_large_time(const ModelParams& p, double t) {
  const double bt = p.beta * t;
  const double o12sq = p.omega12 * p.omega12;
  const double o23sq = p.omega23 * p.omega23;
  return {bt + (o12sq + o23sq) / bt, p.delta - o23sq / bt,
          -p.delta - o12sq / bt};
}

inline Mat3 frame_large_time(const ModelParams& p, double t) {
  const double bt = p.beta * t;
  const double o12 = p.omega12, o23 = p.omega23;
  const double d = p.delta;
  Mat3 f;
  f.m[0][0] = o12 / bt;
  f.m[1][0] = 1.0 - (o12 * o12 + o23 * o23) / (2.0 * bt * bt);
  f.m[2][0] = o23 / bt;
  f.m[0][1] = -o12 * o23 / (2.0 * d * bt);
  f.m[1][1] = -o23 / bt;
  f.m[2][1] = 1.0 - o23 * o23 * (o12 * o12 + 4.0 * d * d) / (8.0 * d * d * bt * bt);
  f.m[0][2] = -1.0 + o12 * o12 * (o23 * o23 + 4.0 * d * d) / (8.0 * d * d * bt * bt);
  f.m[1][2] = o12 / bt;
  f.m[2][2] = -o12 * o23 / (2.0 * d * bt);
  return f;
}

}  // namespace lz3
