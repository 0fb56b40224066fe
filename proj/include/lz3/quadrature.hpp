#pragma once

// Globally adaptive Gauss-Kronrod (G7, K15) quadrature on a panel list:
// the panel with the largest error estimate is bisected until the summed
// estimate meets the requested absolute tolerance. Supports vector-valued
// integrands (all components share the panel subdivision) and caller-seeded
// split points for known interior features.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lz3/errors.hpp"

namespace lz3 {

namespace detail {

// 15-point Kronrod abscissae on [-1,1] (symmetric; only x >= 0 stored) and
// weights; the embedded 7-point Gauss rule uses the odd-indexed abscissae.
inline constexpr double gk_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double gk_wg[4] = {0.129484966168870, 0.279705391489277,
                                    0.381830050505119, 0.417959183673469};

template <std::size_t N>
struct Panel {
  double a, b;
  std::array<double, N> value;
  double err;
};

// One K15/G7 evaluation over [a,b] for an N-component integrand.
template <std::size_t N, class F>
Panel<N> gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, N> resk{}, resg{};
  for (int j = 0; j < 8; ++j) {
    std::array<double, N> fsum = f(c + h * gk_x[j]);
    if (j < 7) {
      const std::array<double, N> flo = f(c - h * gk_x[j]);
      for (std::size_t i = 0; i < N; ++i) fsum[i] += flo[i];
    }
    for (std::size_t i = 0; i < N; ++i) {
      resk[i] += gk_wk[j] * fsum[i];
      if (j % 2 == 1) resg[i] += gk_wg[j / 2] * fsum[i];
    }
  }
  Panel<N> p{a, b, {}, 0.0};
  for (std::size_t i = 0; i < N; ++i) {
    p.value[i] = resk[i] * h;
    p.err = std::max(p.err, std::abs((resk[i] - resg[i]) * h));
  }
  return p;
}

}  // namespace detail

template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> value{};
  double error_estimate = 0.0;
  int panels = 0;
};

// Integrate f over [a, b] (a > b allowed: value is negated) to absolute
// tolerance abs_tol. split_points seeds interior panel boundaries.
template <std::size_t N, class F>
QuadratureResult<N> integrate_gk(F&& f, double a, double b, double abs_tol,
                                 const std::vector<double>& split_points = {},
                                 int max_panels = 4000) {
  QuadratureResult<N> result;
  if (a == b) return result;
  double sign = 1.0;
  double lo = a, hi = b;
  if (lo > hi) {
    std::swap(lo, hi);
    sign = -1.0;
  }
  std::vector<double> edges{lo};
  for (double s : split_points)
    if (s > lo && s < hi) edges.push_back(s);
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());

  std::vector<detail::Panel<N>> panels;
  panels.reserve(64);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    panels.push_back(detail::gk15<N>(f, edges[i], edges[i + 1]));

  auto total_err = [&] {
    double e = 0.0;
    for (const auto& p : panels) e += p.err;
    return e;
  };

  while (total_err() > abs_tol) {
    if (static_cast<int>(panels.size()) >= max_panels)
      throw error(errc::quadrature_failure,
                  "tolerance not reached with " + std::to_string(max_panels) +
                      " panels");
    auto worst = std::max_element(
        panels.begin(), panels.end(),
        [](const auto& x, const auto& y) { return x.err < y.err; });
    const double wa = worst->a, wb = worst->b, wm = 0.5 * (wa + wb);
    if (!(wa < wm && wm < wb))
      throw error(errc::quadrature_failure,
                  "panel width underflow near t = " + std::to_string(wa));
    *worst = detail::gk15<N>(f, wa, wm);
    panels.push_back(detail::gk15<N>(f, wm, wb));
  }

  for (const auto& p : panels)
    for (std::size_t i = 0; i < N; ++i) result.value[i] += p.value[i];
  for (auto& v : result.value) v *= sign;
  result.error_estimate = total_err();
  result.panels = static_cast<int>(panels.size());
  return result;
}

// Scalar convenience wrapper.
template <class F>
QuadratureResult<1> integrate_gk1(F&& f, double a, double b, double abs_tol,
                                  const std::vector<double>& split_points = {},
                                  int max_panels = 4000) {
  auto wrap = [&f](double t) { return std::array<double, 1>{f(t)}; };
  return integrate_gk<1>(wrap, a, b, abs_tol, split_points, max_panels);
}

}  // namespace lz3
