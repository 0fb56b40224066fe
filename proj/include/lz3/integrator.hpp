#pragma once

// Brute-force oracle: adaptive numerical integration of the Schrodinger
// equation i dC/dt = H(t) C in the diabatic basis (optionally the adiabatic
// basis via the nonadiabatic-coupling matrix), plus column-wise numeric
// propagators and emulation of the infinite-past start of the original
// level-crossing problem.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lz3/errors.hpp"
#include "lz3/format.hpp"
#include "lz3/linalg.hpp"
#include "lz3/model.hpp"
#include "lz3/propagator.hpp"
#include "lz3/spectral.hpp"

namespace lz3 {

struct StateVector {
  CVec3 amplitudes{};
  Basis basis = Basis::diabatic;
  double t = 0.0;
};

inline Real3 populations(const CVec3& a) {
  return {std::norm(a[0]), std::norm(a[1]), std::norm(a[2])};
}

struct TrajectorySample {
  double t = 0.0;
  Real3 populations{};
  CVec3 amplitudes{};
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
};

// Step-size cap keyed to the local eigenfrequency. The multiplier is chosen
// so that the (non-unitary) Runge-Kutta map loses at most ~1e-10 of norm
// over windows as long as |t| <= 40: per-step norm defect scales like
// (lambda*h)^6, so capping lambda*h at 0.01 keeps the accumulated drift
// comfortably below the 1e-9 diagnostic bound.
inline double eigenfrequency_max_step(const ModelParams& p, double t) {
  const Real3 lam = eigenvalues(p, t);
  const double lmax = std::max(std::abs(lam[0]), std::abs(lam[2]));
  return 0.01 / std::max(lmax, std::sqrt(p.beta));
}

namespace detail {

// One accepted Dormand-Prince 5(4) step with its quartic dense-output
// interpolant (Hairer-Norsett-Wanner continuous extension).
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0, t1 = 0.0;
  std::array<cplx, N> r1{}, r2{}, r3{}, r4{}, r5{};

  std::array<cplx, N> eval(double t) const {
    const double th = (t - t0) / (t1 - t0);
    const double th1 = 1.0 - th;
    std::array<cplx, N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
    return y;
  }
};

// Adaptive Dormand-Prince 5(4) driver for a complex N-component linear ODE
// y' = f(t, y). Calls on_step(dense, y_new) after every accepted step;
// max_step(t) caps |h|. Supports t_to < t_from (backward integration).
template <std::size_t N, class RHS, class MaxStep, class OnStep>
std::array<cplx, N> dopri5(RHS&& f, double t_from, double t_to,
                           std::array<cplx, N> y, double rtol, double atol,
                           MaxStep&& max_step, OnStep&& on_step) {
  if (t_from == t_to) return y;
  const double dir = t_to > t_from ? 1.0 : -1.0;
  double t = t_from;
  auto k1 = f(t, y);
  double h = dir * std::min(std::abs(t_to - t_from), max_step(t_from));
  bool rejected = false;
  long long n_attempts = 0;
  constexpr double d1 = -12715105075.0 / 11282082432.0;
  constexpr double d3 = 87487479700.0 / 32700410799.0;
  constexpr double d4 = -10690763975.0 / 1880347072.0;
  constexpr double d5 = 701980252875.0 / 199316789632.0;
  constexpr double d6 = -1453857185.0 / 822651844.0;
  constexpr double d7 = 69997945.0 / 29380423.0;
  while (dir * (t_to - t) > 0.0) {
    bool last = false;
    if (dir * (t + h) >= dir * t_to) {
      h = t_to - t;
      last = true;
    }
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() *
                        std::max({1.0, std::abs(t), std::abs(t_to)});
    if (std::abs(h) < hmin)
      throw error(errc::step_size_underflow,
                  "step size underflow at t = " + std::to_string(t));
    if (++n_attempts > 100'000'000)
      throw error(errc::step_size_underflow,
                  "step budget exhausted at t = " + std::to_string(t));
    using Arr = std::array<cplx, N>;
    auto comb = [&y, &h](std::initializer_list<std::pair<double, const Arr*>>
                             terms) {
      Arr r = y;
      for (const auto& [c, k] : terms) {
        const double ch = h * c;
        for (std::size_t i = 0; i < N; ++i) r[i] += ch * (*k)[i];
      }
      return r;
    };
    const Arr k2 = f(t + h / 5.0, comb({{1.0 / 5.0, &k1}}));
    const Arr k3 =
        f(t + 3.0 * h / 10.0, comb({{3.0 / 40.0, &k1}, {9.0 / 40.0, &k2}}));
    const Arr k4 = f(t + 4.0 * h / 5.0, comb({{44.0 / 45.0, &k1},
                                              {-56.0 / 15.0, &k2},
                                              {32.0 / 9.0, &k3}}));
    const Arr k5 = f(t + 8.0 * h / 9.0, comb({{19372.0 / 6561.0, &k1},
                                              {-25360.0 / 2187.0, &k2},
                                              {64448.0 / 6561.0, &k3},
                                              {-212.0 / 729.0, &k4}}));
    const Arr k6 = f(t + h, comb({{9017.0 / 3168.0, &k1},
                                  {-355.0 / 33.0, &k2},
                                  {46732.0 / 5247.0, &k3},
                                  {49.0 / 176.0, &k4},
                                  {-5103.0 / 18656.0, &k5}}));
    const Arr ynew = comb({{35.0 / 384.0, &k1},
                           {500.0 / 1113.0, &k3},
                           {125.0 / 192.0, &k4},
                           {-2187.0 / 6784.0, &k5},
                           {11.0 / 84.0, &k6}});
    const Arr k7 = f(t + h, ynew);
    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const cplx e =
          h * ((71.0 / 57600.0) * k1[i] - (71.0 / 16695.0) * k3[i] +
               (71.0 / 1920.0) * k4[i] - (17253.0 / 339200.0) * k5[i] +
               (22.0 / 525.0) * k6[i] - (1.0 / 40.0) * k7[i]);
      const double sc =
          atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = std::abs(e) / sc;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(N));
    if (err <= 1.0) {
      DenseStep<N> ds;
      ds.t0 = t;
      ds.t1 = last ? t_to : t + h;
      for (std::size_t i = 0; i < N; ++i) {
        const cplx ydiff = ynew[i] - y[i];
        const cplx bspl = h * k1[i] - ydiff;
        ds.r1[i] = y[i];
        ds.r2[i] = ydiff;
        ds.r3[i] = bspl;
        ds.r4[i] = ydiff - h * k7[i] - bspl;
        ds.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                        d6 * k6[i] + d7 * k7[i]);
      }
      t = ds.t1;
      y = ynew;
      k1 = k7;  // first-same-as-last
      on_step(ds, y);
      const double facmax = rejected ? 1.0 : 5.0;
      const double fac =
          err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, facmax)
                    : facmax;
      h *= fac;
      rejected = false;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      rejected = true;
    }
    const double cap = max_step(t);
    if (std::abs(h) > cap) h = dir * cap;
  }
  return y;
}

inline std::array<cplx, 3> schrodinger_rhs_diabatic(const ModelParams& p,
                                                    double t,
                                                    const std::array<cplx, 3>&
                                                        y) {
  const Mat3 hmat = hamiltonian_at(p, t);
  std::array<cplx, 3> dy;
  for (int i = 0; i < 3; ++i) {
    cplx s = 0.0;
    for (int j = 0; j < 3; ++j) s += hmat.m[i][j] * y[j];
    dy[i] = cplx(0.0, -1.0) * s;
  }
  return dy;
}

// i dA/dt = (diag(lambda) - i nu) A with nu = F^T dF/dt.
inline std::array<cplx, 3> schrodinger_rhs_adiabatic(const ModelParams& p,
                                                     double t,
                                                     const std::array<cplx, 3>&
                                                         y) {
  const Real3 lam = eigenvalues(p, t);
  const Mat3 nu = nonadiabatic_couplings(p, t);
  std::array<cplx, 3> dy;
  for (int i = 0; i < 3; ++i) {
    cplx s = cplx(0.0, -lam[i]) * y[i];
    for (int j = 0; j < 3; ++j) s -= nu.m[i][j] * y[j];
    dy[i] = s;
  }
  return dy;
}

}  // namespace detail

struct IntegrationResult {
  StateVector state;
  Trajectory trajectory;
  double norm_drift = 0.0;  // | ||C(t_f)||^2 - ||C(t_i)||^2 |
};

// Propagate a state vector across a finite window. sample_dt == 0 records
// one trajectory sample per accepted step; sample_dt > 0 samples the dense
// interpolant on a uniform grid. Trajectory times are strictly increasing
// even for backward runs (samples are reversed). No renormalization is
// applied; norm_drift is the diagnostic.
inline IntegrationResult integrate(const ModelParams& p,
                                   const StateVector& initial, double t_from,
                                   double t_to, double rtol = 1e-10,
                                   double atol = 1e-12,
                                   double sample_dt = 0.0) {
  validate(p);
  if (!std::isfinite(t_from) || !std::isfinite(t_to))
    throw error(errc::invalid_argument, "integration window must be finite");
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw error(errc::invalid_argument, "rtol and atol must be positive");
  if (sample_dt < 0.0)
    throw error(errc::invalid_argument, "sample_dt must be >= 0");

  IntegrationResult res;
  res.state = initial;
  res.state.t = t_from;
  auto& samples = res.trajectory.samples;
  auto push = [&samples](double t, const CVec3& y) {
    samples.push_back({t, populations(y), y});
  };
  push(t_from, initial.amplitudes);
  if (t_from == t_to) return res;

  const double dir = t_to > t_from ? 1.0 : -1.0;
  long long next_k = 1;
  auto on_step = [&](const detail::DenseStep<3>& ds, const CVec3& ynew) {
    if (sample_dt <= 0.0) {
      push(ds.t1, ynew);
      return;
    }
    for (;; ++next_k) {
      const double ts = t_from + dir * static_cast<double>(next_k) * sample_dt;
      if (dir * (ts - ds.t1) > 0.0 || dir * (ts - t_to) > 0.0) break;
      push(ts, ds.eval(ts));
    }
  };
  auto max_step = [&p](double t) { return eigenfrequency_max_step(p, t); };
  CVec3 yf;
  if (initial.basis == Basis::diabatic) {
    auto rhs = [&p](double t, const CVec3& y) {
      return detail::schrodinger_rhs_diabatic(p, t, y);
    };
    yf = detail::dopri5<3>(rhs, t_from, t_to, initial.amplitudes, rtol, atol,
                           max_step, on_step);
  } else {
    auto rhs = [&p](double t, const CVec3& y) {
      return detail::schrodinger_rhs_adiabatic(p, t, y);
    };
    yf = detail::dopri5<3>(rhs, t_from, t_to, initial.amplitudes, rtol, atol,
                           max_step, on_step);
  }
  if (samples.back().t != t_to) push(t_to, yf);
  if (dir < 0.0) std::reverse(samples.begin(), samples.end());
  res.state.amplitudes = yf;
  res.state.t = t_to;
  res.norm_drift = std::abs(norm2(yf) - norm2(initial.amplitudes));
  return res;
}

namespace detail {

inline std::array<cplx, 9> matrix_rhs_diabatic(const ModelParams& p, double t,
                                               const std::array<cplx, 9>& u) {
  const Mat3 hmat = hamiltonian_at(p, t);
  std::array<cplx, 9> du{};
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) {
      cplx s = 0.0;
      for (int j = 0; j < 3; ++j) s += hmat.m[i][j] * u[3 * j + c];
      du[3 * i + c] = cplx(0.0, -1.0) * s;
    }
  return du;
}

inline std::array<cplx, 9> matrix_rhs_adiabatic(const ModelParams& p, double t,
                                                const std::array<cplx, 9>& u) {
  const Real3 lam = eigenvalues(p, t);
  const Mat3 nu = nonadiabatic_couplings(p, t);
  std::array<cplx, 9> du{};
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) {
      cplx s = cplx(0.0, -lam[i]) * u[3 * i + c];
      for (int j = 0; j < 3; ++j) s -= nu.m[i][j] * u[3 * j + c];
      du[3 * i + c] = s;
    }
  return du;
}

inline CMat3 unpack(const std::array<cplx, 9>& u) {
  CMat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = u[3 * i + j];
  return r;
}

}  // namespace detail

// Numerically exact propagator over a finite window, assembled column-wise
// from the three canonical initial conditions.
inline Propagator3 numeric_propagator(const ModelParams& p, double t_from,
                                      double t_to, double rtol = 1e-10,
                                      double atol = 1e-12,
                                      Basis basis = Basis::diabatic) {
  validate(p);
  if (!std::isfinite(t_from) || !std::isfinite(t_to))
    throw error(errc::invalid_argument, "integration window must be finite");
  std::array<cplx, 9> u{};
  for (int k = 0; k < 3; ++k) u[3 * k + k] = 1.0;
  auto max_step = [&p](double t) { return eigenfrequency_max_step(p, t); };
  auto sink = [](const detail::DenseStep<9>&, const std::array<cplx, 9>&) {};
  if (basis == Basis::diabatic) {
    auto rhs = [&p](double t, const std::array<cplx, 9>& y) {
      return detail::matrix_rhs_diabatic(p, t, y);
    };
    u = detail::dopri5<9>(rhs, t_from, t_to, u, rtol, atol, max_step, sink);
  } else {
    auto rhs = [&p](double t, const std::array<cplx, 9>& y) {
      return detail::matrix_rhs_adiabatic(p, t, y);
    };
    u = detail::dopri5<9>(rhs, t_from, t_to, u, rtol, atol, max_step, sink);
  }
  return {detail::unpack(u), basis, t_from, t_to};
}

// Diabatic-basis propagators U(times[i], t_from) from a single integration.
// times must move monotonically away from t_from (either direction); one
// sweep over a T grid then needs only two integrations total.
inline std::vector<CMat3> numeric_propagator_samples(
    const ModelParams& p, double t_from, const std::vector<double>& times,
    double rtol = 1e-10, double atol = 1e-12) {
  validate(p);
  if (times.empty())
    throw error(errc::invalid_argument, "no sample times given");
  if (!std::isfinite(t_from))
    throw error(errc::invalid_argument, "integration window must be finite");
  const double dir = times.back() >= t_from ? 1.0 : -1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || dir * (times[i] - t_from) < 0.0 ||
        (i > 0 && dir * (times[i] - times[i - 1]) <= 0.0))
      throw error(errc::invalid_argument,
                  "sample times must move monotonically away from the start");
  }
  std::vector<CMat3> out;
  out.reserve(times.size());
  std::size_t idx = 0;
  while (idx < times.size() && times[idx] == t_from) {
    out.push_back(CMat3::identity());
    ++idx;
  }
  if (idx == times.size()) return out;
  std::array<cplx, 9> u{};
  for (int k = 0; k < 3; ++k) u[3 * k + k] = 1.0;
  auto max_step = [&p](double t) { return eigenfrequency_max_step(p, t); };
  auto on_step = [&](const detail::DenseStep<9>& ds,
                     const std::array<cplx, 9>&) {
    while (idx < times.size() && dir * (times[idx] - ds.t1) <= 0.0) {
      out.push_back(detail::unpack(ds.eval(times[idx])));
      ++idx;
    }
  };
  auto rhs = [&p](double t, const std::array<cplx, 9>& y) {
    return detail::matrix_rhs_diabatic(p, t, y);
  };
  u = detail::dopri5<9>(rhs, t_from, times.back(), u, rtol, atol, max_step,
                        on_step);
  if (idx < times.size())  // final time missed only through roundoff
    out.push_back(detail::unpack(u));
  return out;
}

// Initial condition emulating a start in diabatic state psi_n at t -> -inf:
// the adiabatic eigenvector at t0 = -|t0| that connects to psi_n there
// (psi_3 -> phi_1, psi_1 -> -phi_2, psi_2 -> phi_3).
inline StateVector do_start_state(const ModelParams& p, int diabatic_index,
                                  double t0_magnitude) {
  validate(p);
  if (diabatic_index < 1 || diabatic_index > 3)
    throw error(errc::invalid_argument, "diabatic_index must be 1, 2 or 3");
  const double m = std::abs(t0_magnitude);
  if (!std::isfinite(m) ||
      p.beta * m < 20.0 * std::max({p.delta, p.omega12, p.omega23}))
    throw error(errc::t0_too_small,
                "need beta*|t0| >= 20*max(delta, omega12, omega23)");
  const AdiabaticFrame fr = frame_at(p, -m);
  int col = 0;
  double sign = 1.0;
  if (diabatic_index == 3) {
    col = 0;
  } else if (diabatic_index == 1) {
    col = 1;
    sign = -1.0;
  } else {
    col = 2;
  }
  StateVector s;
  s.basis = Basis::diabatic;
  s.t = -m;
  for (int row = 0; row < 3; ++row)
    s.amplitudes[row] = sign * fr.f.m[row][col];
  return s;
}

struct DoStartRun {
  double t0 = 0.0;                 // signed start time (negative)
  StateVector initial;             // diabatic amplitudes at t0
  Real3 averaged_populations{};    // window-averaged populations at +|t0|
};

struct DoEmulation {
  int diabatic_index = 0;
  std::vector<DoStartRun> runs;
  Real3 extrapolated{};  // Richardson-extrapolated in 1/t0^2
};

// Time-average of the diabatic populations over the trailing window
// [t_end - width, t_end] of a run that continues `state`.
namespace detail {

inline Real3 window_averaged_populations(const ModelParams& p,
                                         const StateVector& state,
                                         double t_end, double width,
                                         double rtol, double atol) {
  const IntegrationResult win = integrate(p, state, state.t, t_end, rtol, atol,
                                          width / 512.0);
  const auto& s = win.trajectory.samples;
  Real3 acc{};
  double span = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double w = s[i + 1].t - s[i].t;
    span += w;
    for (int k = 0; k < 3; ++k)
      acc[k] += 0.5 * w * (s[i].populations[k] + s[i + 1].populations[k]);
  }
  for (int k = 0; k < 3; ++k) acc[k] /= span;
  return acc;
}

}  // namespace detail

// Emulate the infinite-past start: for each magnitude m, run [-m, +m] from
// the mapped adiabatic eigenvector, average the final populations over two
// slow beat periods, then Richardson-extrapolate the two largest runs in
// 1/t0^2 (finite-window corrections enter at that order).
inline DoEmulation emulate_do_start(const ModelParams& p, int diabatic_index,
                                    std::vector<double> t0_magnitudes,
                                    double rtol = 1e-10, double atol = 1e-12) {
  validate(p);
  if (t0_magnitudes.empty())
    throw error(errc::invalid_argument, "need at least one t0 magnitude");
  for (double& m : t0_magnitudes) m = std::abs(m);
  std::sort(t0_magnitudes.begin(), t0_magnitudes.end());
  DoEmulation out;
  out.diabatic_index = diabatic_index;
  for (double m : t0_magnitudes) {
    DoStartRun run;
    run.t0 = -m;
    run.initial = do_start_state(p, diabatic_index, m);
    const Real3 lam_end = eigenvalues(p, m);
    const double slow_gap = lam_end[1] - lam_end[2];
    double width = 2.0 * (2.0 * detail::pi / slow_gap);
    width = std::min(width, m);  // keep the window inside the run
    const IntegrationResult head =
        integrate(p, run.initial, -m, m - width, rtol, atol,
                  std::numeric_limits<double>::max());
    run.averaged_populations = detail::window_averaged_populations(
        p, head.state, m, width, rtol, atol);
    out.runs.push_back(run);
  }
  const std::size_t n = out.runs.size();
  if (n == 1) {
    out.extrapolated = out.runs[0].averaged_populations;
  } else {
    const DoStartRun& a = out.runs[n - 2];
    const DoStartRun& b = out.runs[n - 1];
    const double wa = a.t0 * a.t0, wb = b.t0 * b.t0;
    if (wa == wb)
      throw error(errc::invalid_argument,
                  "Richardson extrapolation needs distinct magnitudes");
    for (int k = 0; k < 3; ++k)
      out.extrapolated[k] = (wb * b.averaged_populations[k] -
                             wa * a.averaged_populations[k]) /
                            (wb - wa);
  }
  return out;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,P1,P2,P3,ReC1,ImC1,ReC2,ImC2,ReC3,ImC3\n";
  for (const auto& s : tr.samples) {
    os << detail::format_double(s.t);
    for (int k = 0; k < 3; ++k)
      os << ',' << detail::format_double(s.populations[k]);
    for (int k = 0; k < 3; ++k)
      os << ',' << detail::format_double(s.amplitudes[k].real()) << ','
         << detail::format_double(s.amplitudes[k].imag());
    os << '\n';
  }
}

}  // namespace lz3
