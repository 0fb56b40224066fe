#pragma once

// Experiment engine: parameter scans over window half-width T, energy
// splitting delta, time, and coupling strength, evaluating analytic
// formulas alongside the numeric oracle, with CSV/JSON tabular output.
//
// Observable vocabulary (column names; suffix "@key=value,..." applies
// model-parameter overrides to that column only):
//   P31_numeric       |U_13|^2 (T/delta/coupling axes) or |C_1(t)|^2 from an
//                     emulated infinite-past start (time axis)
//   Pmn_numeric       general numeric P_{m->n}, m,n in 1..3 (window axes)
//   P1, P2, P3        numeric populations along a time-axis trajectory
//   P31_numeric_avg   sliding-window average of P31_numeric over one local
//                     oscillation period
//   P31_full          closed-form finite-window counterintuitive total
//   P31_avg_exact     its non-oscillating (average) part, exact frames
//   P31_osc           its oscillating part
//   P31_avg           two-term 1/T asymptotic average
//   P31_avg_leading   leading 1/T^2 term only
//   P31_adiabatic     near-adiabatic limit
//   P31_weak          weak-coupling limit
//   P31_time_total    time-dependent counterintuitive probability (exact
//                     frames, infinite-past model), time axis
//   P31_time_avg      its average part
//   P31_time_avg_asym large-t asymptotic average part

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lz3/errors.hpp"
#include "lz3/format.hpp"
#include "lz3/integrator.hpp"
#include "lz3/linalg.hpp"
#include "lz3/model.hpp"
#include "lz3/probabilities.hpp"
#include "lz3/propagator.hpp"
#include "lz3/spectral.hpp"

namespace lz3 {

enum class SweepAxis { T, delta, time, coupling };
enum class Spacing { linear, log };

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::T:
      return "T";
    case SweepAxis::delta:
      return "delta";
    case SweepAxis::time:
      return "time";
    case SweepAxis::coupling:
      return "coupling";
  }
  return "?";
}

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "T" || s == "t") return SweepAxis::T;
  if (s == "delta") return SweepAxis::delta;
  if (s == "time") return SweepAxis::time;
  if (s == "coupling") return SweepAxis::coupling;
  throw error(errc::invalid_argument,
              "unknown axis '" + s + "' (T, delta, time, coupling)");
}

inline Spacing parse_spacing(const std::string& s) {
  if (s == "linear") return Spacing::linear;
  if (s == "log") return Spacing::log;
  throw error(errc::invalid_argument,
              "unknown spacing '" + s + "' (linear, log)");
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::T;
  double lo = 0.0;
  double hi = 0.0;
  int n_points = 0;  // 0 = auto: >= 12 points per local oscillation period
  Spacing spacing = Spacing::linear;
  ModelParams base;
  std::vector<std::string> observables;
  double rtol = 1e-10;  // oracle tolerances
  double atol = 1e-12;
  int start_state = 3;  // diabatic start for time-axis trajectories
};

struct SweepCell {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;  // error marker when !ok
};

struct SweepRow {
  double axis_value = 0.0;
  std::vector<SweepCell> cells;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<std::string> columns;
  std::vector<SweepRow> rows;
  double runtime_seconds = 0.0;  // not serialized: output stays deterministic
};

// ---------------------------------------------------------------------------
// Sliding-window averaging

// Mean of the piecewise-linear interpolant of (xs, ys) over the window
// [x_i - w_i/2, x_i + w_i/2] clipped to the sampled range.
inline std::vector<double> sliding_window_average(
    const std::vector<double>& xs, const std::vector<double>& ys,
    const std::vector<double>& widths) {
  const std::size_t n = xs.size();
  if (ys.size() != n || widths.size() != n || n < 2)
    throw error(errc::invalid_argument, "mismatched sliding-average inputs");
  std::vector<double> prefix(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    prefix[i] = prefix[i - 1] +
                0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  auto integral_to = [&](double x) {
    if (x <= xs.front()) return 0.0;
    if (x >= xs.back()) return prefix[n - 1];
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const double x0 = xs[j - 1], x1 = xs[j];
    const double f = (x - x0) / (x1 - x0);
    const double yx = ys[j - 1] + f * (ys[j] - ys[j - 1]);
    return prefix[j - 1] + 0.5 * (ys[j - 1] + yx) * (x - x0);
  };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::max(xs[i] - 0.5 * widths[i], xs.front());
    const double b = std::min(xs[i] + 0.5 * widths[i], xs.back());
    out[i] = b > a ? (integral_to(b) - integral_to(a)) / (b - a) : ys[i];
  }
  return out;
}

// Triangular-kernel (Bartlett) sliding average of the piecewise-linear
// interpolant over [x_i - h_i, x_i + h_i], clipped to the sampled range and
// renormalized by the clipped kernel mass. Residual frequencies are
// attenuated like sinc^2, with exact nulls at every harmonic of the window
// frequency 2*pi/(h/2) — much stronger suppression than a boxcar when the
// signal mixes a fundamental with its double frequency.
inline std::vector<double> sliding_triangular_average(
    const std::vector<double>& xs, const std::vector<double>& ys,
    const std::vector<double>& half_widths) {
  const std::size_t n = xs.size();
  if (ys.size() != n || half_widths.size() != n || n < 2)
    throw error(errc::invalid_argument, "mismatched sliding-average inputs");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs[i], h = half_widths[i];
    const double lo = std::max(x - h, xs.front());
    const double hi = std::min(x + h, xs.back());
    if (!(h > 0.0) || !(hi > lo)) {
      out[i] = ys[i];
      continue;
    }
    double acc = 0.0, mass = 0.0;
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(xs.begin(), xs.end(), lo) - xs.begin());
    if (j == 0) j = 1;
    for (; j < n && xs[j - 1] < hi; ++j) {
      const double a = std::max(xs[j - 1], lo), b = std::min(xs[j], hi);
      if (!(b > a)) continue;
      const double s = (ys[j] - ys[j - 1]) / (xs[j] - xs[j - 1]);
      const double ya = ys[j - 1] + s * (x - xs[j - 1]);  // value at u = x
      // work in v = u - x; kernel is linear on each side of v = 0
      const auto piece = [&](double va, double vb, double k0, double k1) {
        const double c1 = k0 * s + k1 * ya, c2 = k1 * s;
        acc += k0 * ya * (vb - va) + 0.5 * c1 * (vb * vb - va * va) +
               c2 * (vb * vb * vb - va * va * va) / 3.0;
        mass += k0 * (vb - va) + 0.5 * k1 * (vb * vb - va * va);
      };
      const double va = a - x, vb = b - x;
      const double vm = std::clamp(0.0, va, vb);
      if (va < vm) piece(va, vm, 1.0 / h, 1.0 / (h * h));
      if (vm < vb) piece(vm, vb, 1.0 / h, -1.0 / (h * h));
    }
    out[i] = mass > 0.0 ? acc / mass : ys[i];
  }
  return out;
}

namespace detail {

// Local oscillation period of the relevant dynamical phase along the sweep
// axis. Window-width (T) scans beat against the full-window phase, whose
// rate is lambda_1 - lambda_3 (plus a double-frequency harmonic); running
// time t beats against lambda_1 - lambda_2 only.
inline double local_period(const ModelParams& p, SweepAxis axis, double x,
                           double window_T) {
  switch (axis) {
    case SweepAxis::T: {
      const Real3 lam = eigenvalues(p, x);
      return 2.0 * pi / (lam[0] - lam[2]);
    }
    case SweepAxis::time: {
      const Real3 lam = eigenvalues(p, x);
      return 2.0 * pi / (lam[0] - lam[1]);
    }
    case SweepAxis::delta:
    case SweepAxis::coupling: {
      // d(Lambda_12)/dx by central difference of the quadrature phase.
      const double h = 1e-4 * std::max(std::abs(x), 1.0);
      auto phase = [&](double v) {
        ModelParams q = p;
        if (axis == SweepAxis::delta)
          q.delta = v;
        else
          q.omega12 = q.omega23 = v;
        const double tau = crossing_tau(q);
        const PhaseIntegrals pi_ = phase_integrals(q, tau, window_T);
        return pi_.lambda[0] - pi_.lambda[1];
      };
      const double d = (phase(x + h) - phase(x - h)) / (2.0 * h);
      if (std::abs(d) < 1e-12) return std::numeric_limits<double>::infinity();
      return 2.0 * pi / std::abs(d);
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Observable parsing

namespace detail {

struct ParsedObservable {
  std::string column;    // full column name including any suffix
  std::string quantity;  // part before '@'
  std::string variant;   // suffix text (grouping key), "" if none
  ModelParams params;    // base with overrides applied
  int pm = 0, pn = 0;    // for Pmn_numeric
};

inline bool quantity_known(const std::string& q, int* m, int* n) {
  static const char* names[] = {
      "P31_numeric",  "P31_numeric_avg", "P1",          "P2",
      "P3",           "P31_full",        "P31_avg_exact", "P31_osc",
      "P31_avg",      "P31_avg_leading", "P31_adiabatic", "P31_weak",
      "P31_time_total", "P31_time_avg",  "P31_time_avg_asym"};
  for (const char* s : names)
    if (q == s) return true;
  // general Pmn_numeric
  if (q.size() == 11 && q.compare(3, 8, "_numeric") == 0 && q[0] == 'P' &&
      q[1] >= '1' && q[1] <= '3' && q[2] >= '1' && q[2] <= '3') {
    if (m) *m = q[1] - '0';
    if (n) *n = q[2] - '0';
    return true;
  }
  return false;
}

inline ParsedObservable parse_observable(const std::string& name,
                                         const ModelParams& base) {
  ParsedObservable po;
  po.column = name;
  const auto at = name.find('@');
  po.quantity = name.substr(0, at);
  po.params = base;
  if (at != std::string::npos) {
    po.variant = name.substr(at + 1);
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < po.variant.size()) {
      const auto comma = po.variant.find(',', pos);
      const std::string item = po.variant.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0)
        throw error(errc::invalid_argument,
                    "bad observable override '" + item + "' in " + name);
      kv[item.substr(0, eq)] = item.substr(eq + 1);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    apply_model_config(kv, po.params);
  }
  int m = 0, n = 0;
  if (!quantity_known(po.quantity, &m, &n))
    throw error(errc::invalid_argument,
                "unknown observable '" + po.quantity + "'");
  if (po.quantity.size() == 11 && po.quantity.compare(3, 8, "_numeric") == 0 &&
      po.quantity != "P31_numeric") {
    po.pm = m;
    po.pn = n;
  } else if (po.quantity == "P31_numeric" ||
             po.quantity == "P31_numeric_avg") {
    po.pm = 3;
    po.pn = 1;
  }
  return po;
}

// Per-variant numeric caches shared by all observables of the same variant.
struct VariantCache {
  bool have_window_props = false;
  std::vector<CMat3> u;  // window propagators U(x, -x) or U(t_f, t_i)
  bool have_chain = false;
  std::vector<CVec3> chain;  // time-axis states at the grid times
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Grids

inline std::vector<double> sweep_grid(const SweepSpec& spec, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  if (spec.spacing == Spacing::linear) {
    const double d = (spec.hi - spec.lo) / (n - 1);
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] =
        i == n - 1 ? spec.hi : spec.lo + i * d;
  } else {
    const double la = std::log(spec.lo), lb = std::log(spec.hi);
    const double d = (lb - la) / (n - 1);
    for (int i = 0; i < n; ++i)
      xs[static_cast<std::size_t>(i)] =
          i == n - 1 ? spec.hi : std::exp(la + i * d);
  }
  return xs;
}

namespace detail {

inline int auto_n_points(const SweepSpec& spec) {
  const double window_T =
      std::isfinite(spec.base.t_end) ? spec.base.t_end : spec.hi;
  double period = local_period(spec.base, spec.axis, spec.hi, window_T);
  // the window-width axis carries a double-frequency harmonic
  if (spec.axis == SweepAxis::T) period *= 0.5;
  if (!std::isfinite(period) || period <= 0.0) period = spec.hi - spec.lo;
  const double n = 12.0 * (spec.hi - spec.lo) / period;
  return std::clamp(static_cast<int>(std::ceil(n)) + 1, 64, 20001);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run_sweep

namespace detail {

inline void validate_spec(const SweepSpec& spec) {
  validate(spec.base);
  if (!std::isfinite(spec.lo) || !std::isfinite(spec.hi) ||
      !(spec.lo < spec.hi))
    throw error(errc::invalid_argument, "sweep needs finite lo < hi");
  if (spec.n_points != 0 && spec.n_points < 2)
    throw error(errc::invalid_argument, "n_points must be >= 2 (0 = auto)");
  if (spec.spacing == Spacing::log && !(spec.lo > 0.0))
    throw error(errc::invalid_argument, "log spacing needs lo > 0");
  if (spec.observables.empty())
    throw error(errc::invalid_argument, "no observables requested");
  if (spec.start_state < 1 || spec.start_state > 3)
    throw error(errc::invalid_argument, "start_state must be 1, 2 or 3");
  if ((spec.axis == SweepAxis::delta || spec.axis == SweepAxis::coupling) &&
      !spec.base.finite_window())
    throw error(errc::invalid_argument,
                "delta/coupling sweeps need a finite base window "
                "(from/to)");
  if (spec.axis == SweepAxis::delta || spec.axis == SweepAxis::T ||
      spec.axis == SweepAxis::coupling) {
    if (!(spec.lo > 0.0))
      throw error(errc::invalid_argument, "axis values must be positive");
  }
}

// Diabatic start time for emulated infinite-past trajectories.
inline double do_start_magnitude(const ModelParams& p) {
  return 20.0 * std::max({p.delta, p.omega12, p.omega23}) / p.beta;
}

inline ModelParams params_at(const SweepSpec& spec, const ModelParams& vp,
                             double x) {
  ModelParams q = vp;
  switch (spec.axis) {
    case SweepAxis::T:
      q.t_start = -x;
      q.t_end = x;
      break;
    case SweepAxis::delta:
      q.delta = x;
      break;
    case SweepAxis::coupling:
      q.omega12 = q.omega23 = x;
      break;
    case SweepAxis::time:
      break;
  }
  return q;
}

inline void ensure_window_propagators(const SweepSpec& spec,
                                      const ModelParams& vp,
                                      const std::vector<double>& xs,
                                      VariantCache& cache) {
  if (cache.have_window_props) return;
  const std::size_t n = xs.size();
  cache.u.resize(n);
  if (spec.axis == SweepAxis::T) {
    // U(x, -x) = U(x, 0) * U(-x, 0)^dagger from two outward integrations.
    std::vector<double> plus(xs), minus(n);
    for (std::size_t i = 0; i < n; ++i) minus[i] = -xs[i];
    const auto up =
        numeric_propagator_samples(vp, 0.0, plus, spec.rtol, spec.atol);
    const auto um =
        numeric_propagator_samples(vp, 0.0, minus, spec.rtol, spec.atol);
    for (std::size_t i = 0; i < n; ++i) cache.u[i] = up[i] * adjoint(um[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const ModelParams q = params_at(spec, vp, xs[i]);
      cache.u[i] = numeric_propagator(q, q.t_start, q.t_end, spec.rtol,
                                      spec.atol)
                       .u;
    }
  }
  cache.have_window_props = true;
}

inline void ensure_chain(const SweepSpec& spec, const ModelParams& vp,
                         const std::vector<double>& xs, VariantCache& cache) {
  if (cache.have_chain) return;
  const double m = do_start_magnitude(vp);
  if (xs.front() <= -m)
    throw error(errc::invalid_argument,
                "time grid must start after the emulated start time");
  StateVector s = do_start_state(vp, spec.start_state, m);
  double cursor = -m;
  cache.chain.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s = integrate(vp, s, cursor, xs[i], spec.rtol, spec.atol,
                  std::numeric_limits<double>::max())
            .state;
    cursor = xs[i];
    cache.chain[i] = s.amplitudes;
  }
  cache.have_chain = true;
}

// window half-width used by analytic window formulas on delta/coupling axes
inline double fixed_half_width(const ModelParams& vp) {
  if (!(std::isfinite(vp.t_start) && std::isfinite(vp.t_end)) ||
      vp.t_start != -vp.t_end)
    throw error(errc::symmetry_required,
                "analytic window formulas need a symmetric window [-T, T]");
  return vp.t_end;
}

}  // namespace detail

inline SweepResult run_sweep(const SweepSpec& spec) {
  const auto clock0 = std::chrono::steady_clock::now();
  detail::validate_spec(spec);
  const int n = spec.n_points == 0 ? detail::auto_n_points(spec)
                                   : spec.n_points;
  const std::vector<double> xs = sweep_grid(spec, n);

  std::vector<detail::ParsedObservable> obs;
  obs.reserve(spec.observables.size());
  for (const auto& name : spec.observables)
    obs.push_back(detail::parse_observable(name, spec.base));

  std::map<std::string, detail::VariantCache> caches;

  SweepResult res;
  res.spec = spec;
  res.spec.n_points = n;
  res.columns = spec.observables;
  res.rows.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    res.rows[i].axis_value = xs[i];
    res.rows[i].cells.resize(obs.size());
  }

  for (std::size_t c = 0; c < obs.size(); ++c) {
    const auto& po = obs[c];
    detail::VariantCache& cache = caches[po.variant];
    const std::string& q = po.quantity;
    const bool needs_numeric =
        q == "P31_numeric" || q == "P31_numeric_avg" || po.pm != 0 ||
        q == "P1" || q == "P2" || q == "P3";

    // Column-level preparation; a failure marks the whole column.
    std::string column_error;
    try {
      if (needs_numeric) {
        if (spec.axis == SweepAxis::time)
          detail::ensure_chain(spec, po.params, xs, cache);
        else
          detail::ensure_window_propagators(spec, po.params, xs, cache);
      }
    } catch (const error& e) {
      column_error = errc_name(e.code());
    }

    std::vector<double> numeric_vals;  // for the sliding average
    for (std::size_t i = 0; i < xs.size(); ++i) {
      SweepCell& cell = res.rows[i].cells[c];
      if (!column_error.empty()) {
        cell.error = column_error;
        continue;
      }
      const double x = xs[i];
      try {
        double v = std::numeric_limits<double>::quiet_NaN();
        const ModelParams q_at = detail::params_at(spec, po.params, x);
        const double wT = spec.axis == SweepAxis::T
                              ? x
                              : (spec.axis == SweepAxis::time
                                     ? x
                                     : detail::fixed_half_width(po.params));
        if (q == "P31_numeric" || po.pm != 0) {
          const int m = po.pm == 0 ? 3 : po.pm;
          const int nn = po.pn == 0 ? 1 : po.pn;
          if (spec.axis == SweepAxis::time) {
            if (m != spec.start_state)
              throw error(errc::invalid_argument,
                          "time-axis numeric start is psi_" +
                              std::to_string(spec.start_state));
            v = std::norm(cache.chain[i][nn - 1]);
          } else {
            v = std::norm(cache.u[i].m[nn - 1][m - 1]);
          }
        } else if (q == "P1" || q == "P2" || q == "P3") {
          if (spec.axis != SweepAxis::time)
            throw error(errc::invalid_argument,
                        "populations are time-axis observables");
          v = std::norm(cache.chain[i][q[1] - '1']);
        } else if (q == "P31_full") {
          v = p31_full(q_at, wT).total;
        } else if (q == "P31_avg_exact") {
          v = p31_full(q_at, wT).average;
        } else if (q == "P31_osc") {
          v = p31_full(q_at, wT).oscillating;
        } else if (q == "P31_avg") {
          v = p31_average_asymptotic(q_at, wT, 2);
        } else if (q == "P31_avg_leading") {
          v = p31_average_asymptotic(q_at, wT, 1);
        } else if (q == "P31_adiabatic") {
          v = p31_limit_adiabatic(q_at, wT);
        } else if (q == "P31_weak") {
          v = p31_limit_weak(q_at, wT);
        } else if (q == "P31_time_total") {
          v = p31_time_split(q_at, x).total;
        } else if (q == "P31_time_avg") {
          v = p31_time_split(q_at, x).average;
        } else if (q == "P31_time_avg_asym") {
          v = p31_time_split_asymptotic(q_at, x).average;
        } else if (q == "P31_numeric_avg") {
          // filled in a post-pass below
          continue;
        }
        cell.value = v;
        cell.ok = true;
      } catch (const error& e) {
        cell.error = errc_name(e.code());
      }
    }

    if (q == "P31_numeric_avg" && column_error.empty()) {
      std::vector<double> ys(xs.size()), widths(xs.size());
      bool usable = true;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (spec.axis == SweepAxis::time) {
          if (spec.start_state != 3) usable = false;
          ys[i] = usable ? std::norm(cache.chain[i][0]) : 0.0;
        } else {
          ys[i] = std::norm(cache.u[i].m[0][2]);
        }
        const ModelParams q_at = detail::params_at(spec, po.params, xs[i]);
        const double wT =
            spec.axis == SweepAxis::delta || spec.axis == SweepAxis::coupling
                ? detail::fixed_half_width(po.params)
                : xs[i];
        widths[i] = detail::local_period(q_at, spec.axis, xs[i], wT);
      }
      if (usable) {
        std::vector<double> avg;
        if (spec.axis == SweepAxis::T) {
          // two kernel periods of the full-window phase: exact nulls on the
          // fundamental and its double frequency
          for (double& w : widths) w *= 2.0;
          avg = sliding_triangular_average(xs, ys, widths);
        } else {
          avg = sliding_window_average(xs, ys, widths);
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
          res.rows[i].cells[c].value = avg[i];
          res.rows[i].cells[c].ok = true;
          res.rows[i].cells[c].error.clear();
        }
      } else {
        for (std::size_t i = 0; i < xs.size(); ++i)
          res.rows[i].cells[c].error = errc_name(errc::invalid_argument);
      }
    }
  }

  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0)
          .count();
  return res;
}

// ---------------------------------------------------------------------------
// Figure presets

// Populations of the diabatic and the adiabatic states along one emulated
// infinite-past trajectory, on a shared time grid.
struct Figure2 {
  Trajectory diabatic;
  Trajectory adiabatic;
};

inline Figure2 figure2_trajectories(
    const ModelParams& p, int start_state = 1,
    double plot_from = std::numeric_limits<double>::quiet_NaN(),
    double plot_to = std::numeric_limits<double>::quiet_NaN(),
    int n_samples = 2001, double rtol = 1e-10, double atol = 1e-12) {
  validate(p);
  const double scale = std::max(crossing_tau(p), 1.0 / std::sqrt(p.beta));
  if (std::isnan(plot_from)) plot_from = -6.0 * scale;
  if (std::isnan(plot_to)) plot_to = 6.0 * scale;
  if (!(plot_from < plot_to) || n_samples < 2)
    throw error(errc::invalid_argument, "bad plot window");
  const double m = detail::do_start_magnitude(p);
  StateVector s = do_start_state(p, start_state, std::max(m, -plot_from));
  const IntegrationResult head =
      integrate(p, s, s.t, plot_from, rtol, atol,
                std::numeric_limits<double>::max());
  const double dt = (plot_to - plot_from) / (n_samples - 1);
  const IntegrationResult run =
      integrate(p, head.state, plot_from, plot_to, rtol, atol, dt);
  Figure2 fig;
  fig.diabatic = run.trajectory;
  fig.adiabatic.samples.reserve(run.trajectory.samples.size());
  for (const auto& smp : run.trajectory.samples) {
    const Mat3 ft = transpose(frame_at(p, smp.t).f);
    const CVec3 a = ft * smp.amplitudes;
    fig.adiabatic.samples.push_back({smp.t, populations(a), a});
  }
  return fig;
}

inline void write_figure2_csv(std::ostream& os, const Figure2& fig) {
  os << "t,P1_diabatic,P2_diabatic,P3_diabatic,"
        "P1_adiabatic,P2_adiabatic,P3_adiabatic\r\n";
  for (std::size_t i = 0; i < fig.diabatic.samples.size(); ++i) {
    const auto& d = fig.diabatic.samples[i];
    const auto& a = fig.adiabatic.samples[i];
    os << detail::format_double(d.t);
    for (int k = 0; k < 3; ++k)
      os << ',' << detail::format_double(d.populations[k]);
    for (int k = 0; k < 3; ++k)
      os << ',' << detail::format_double(a.populations[k]);
    os << "\r\n";
  }
}

// Named sweep presets mirroring the figure setups (natural units beta = 1).
inline SweepSpec preset_sweep(const std::string& name) {
  SweepSpec s;
  s.base.omega12 = s.base.omega23 = 1.0;
  s.base.delta = 1.0;
  s.base.beta = 1.0;
  if (name == "fig3") {
    s.axis = SweepAxis::T;
    s.lo = 2.0;
    s.hi = 30.0;
    s.observables = {"P31_numeric", "P31_full", "P31_avg", "P31_numeric_avg"};
  } else if (name == "fig4") {
    s.axis = SweepAxis::delta;
    s.lo = 0.3;
    s.hi = 4.5;
    s.base.t_start = -5.0;
    s.base.t_end = 5.0;
    s.observables = {"P31_numeric", "P31_full", "P31_avg"};
  } else if (name == "fig5") {
    s.axis = SweepAxis::time;
    s.lo = 1.2;
    s.hi = 10.5;
    s.observables = {"P31_numeric@omega=1", "P31_time_avg@omega=1",
                     "P31_numeric@omega=3", "P31_time_avg@omega=3",
                     "P31_numeric@omega=10", "P31_time_avg@omega=10"};
  } else {
    throw error(errc::invalid_argument,
                "unknown preset '" + name + "' (fig3, fig4, fig5)");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline nlohmann::json time_value_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json params_json(const ModelParams& p) {
  return {{"omega12", p.omega12}, {"omega23", p.omega23},
          {"delta", p.delta},     {"beta", p.beta},
          {"from", time_value_json(p.t_start)},
          {"to", time_value_json(p.t_end)}};
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << detail::csv_quote(axis_name(r.spec.axis));
  for (const auto& c : r.columns) os << ',' << detail::csv_quote(c);
  os << "\r\n";
  for (const auto& row : r.rows) {
    os << detail::format_double(row.axis_value);
    for (const auto& cell : row.cells) {
      os << ',';
      if (cell.ok)
        os << detail::format_double(cell.value);
      else
        os << detail::csv_quote("ERROR:" + cell.error);
    }
    os << "\r\n";
  }
}

inline void write_sweep_json(std::ostream& os, const SweepResult& r) {
  nlohmann::json meta;
  meta["axis"] = axis_name(r.spec.axis);
  meta["spacing"] = r.spec.spacing == Spacing::linear ? "linear" : "log";
  meta["lo"] = r.spec.lo;
  meta["hi"] = r.spec.hi;
  meta["n_points"] = r.spec.n_points;
  meta["rtol"] = r.spec.rtol;
  meta["atol"] = r.spec.atol;
  meta["start_state"] = r.spec.start_state;
  meta["base"] = detail::params_json(r.spec.base);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json jr;
    jr[axis_name(r.spec.axis)] = row.axis_value;
    nlohmann::json errors = nlohmann::json::object();
    for (std::size_t c = 0; c < r.columns.size(); ++c) {
      const auto& cell = row.cells[c];
      if (cell.ok)
        jr[r.columns[c]] = cell.value;
      else {
        jr[r.columns[c]] = nullptr;
        errors[r.columns[c]] = cell.error;
      }
    }
    if (!errors.empty()) jr["errors"] = errors;
    rows.push_back(std::move(jr));
  }
  nlohmann::json doc;
  doc["metadata"] = std::move(meta);
  doc["columns"] = r.columns;
  doc["rows"] = std::move(rows);
  os << doc.dump(2) << '\n';
}

}  // namespace lz3
