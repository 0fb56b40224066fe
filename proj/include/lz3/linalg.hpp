#pragma once

// Minimal fixed-size 3x3 real/complex linear algebra. The whole model lives
// in a three-dimensional state space, so this is deliberately not a general
// matrix library.

#include <array>
#include <cmath>
#include <complex>

namespace lz3 {

using cplx = std::complex<double>;
using Real3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

struct Mat3 {
  // m[row][col]
  std::array<std::array<double, 3>, 3> m{};

  static Mat3 identity() {
    Mat3 r;
    for (int i = 0; i < 3; ++i) r.m[i][i] = 1.0;
    return r;
  }
};

struct CMat3 {
  std::array<std::array<cplx, 3>, 3> m{};

  static CMat3 identity() {
    CMat3 r;
    for (int i = 0; i < 3; ++i) r.m[i][i] = 1.0;
    return r;
  }
};

inline Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = a.m[j][i];
  return r;
}

inline CMat3 adjoint(const CMat3& a) {
  CMat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = std::conj(a.m[j][i]);
  return r;
}

inline CMat3 to_complex(const Mat3& a) {
  CMat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = a.m[i][j];
  return r;
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

inline CMat3 operator*(const CMat3& a, const CMat3& b) {
  CMat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

inline Real3 operator*(const Mat3& a, const Real3& v) {
  Real3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i] += a.m[i][k] * v[k];
  return r;
}

inline CVec3 operator*(const CMat3& a, const CVec3& v) {
  CVec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i] += a.m[i][k] * v[k];
  return r;
}

inline CVec3 operator*(const Mat3& a, const CVec3& v) {
  CVec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i] += a.m[i][k] * v[k];
  return r;
}

inline double norm2(const CVec3& v) {
  return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
}

inline double max_abs_diff(const CMat3& a, const CMat3& b) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      d = std::max(d, std::abs(a.m[i][j] - b.m[i][j]));
  return d;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      d = std::max(d, std::abs(a.m[i][j] - b.m[i][j]));
  return d;
}

// max |(U†U - I)_{ij}|: zero for exactly unitary U.
inline double unitarity_defect(const CMat3& u) {
  return max_abs_diff(adjoint(u) * u, CMat3::identity());
}

inline double orthogonality_defect(const Mat3& f) {
  return max_abs_diff(transpose(f) * f, Mat3::identity());
}

}  // namespace lz3
