#pragma once

// Three-state level-crossing model: two parallel diabatic energies -delta,
// +delta crossed by one slanted energy beta*t, with constant couplings
// omega12 (psi1-psi2) and omega23 (psi2-psi3) active on a time window.
// Infinite windows (the classic infinite-duration limit) are expressed
// with IEEE +-infinity sentinels.

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "lz3/errors.hpp"
#include "lz3/linalg.hpp"

namespace lz3 {

struct ModelParams {
  double omega12 = 1.0;  // psi1-psi2 coupling, units of sqrt(beta)
  double omega23 = 1.0;  // psi2-psi3 coupling
  double delta = 1.0;    // half-splitting of the parallel energies, > 0
  double beta = 1.0;     // slope of the middle diabatic energy, > 0
  double t_start = -std::numeric_limits<double>::infinity();
  double t_end = std::numeric_limits<double>::infinity();

  bool symmetric_couplings() const { return omega12 == omega23; }
  bool finite_window() const {
    return std::isfinite(t_start) && std::isfinite(t_end);
  }
  // Symmetric window [-T, T] with equal couplings: the configuration in
  // which the closed-form finite-duration results apply.
  bool symmetric_case() const {
    return symmetric_couplings() && finite_window() && t_start == -t_end;
  }
};

inline void validate(const ModelParams& p) {
  if (std::isnan(p.delta) || p.delta <= 0.0)
    throw error(errc::non_positive_delta, "delta must be > 0");
  if (std::isnan(p.beta) || p.beta <= 0.0)
    throw error(errc::non_positive_beta, "beta must be > 0");
  if (std::isnan(p.omega12) || p.omega12 < 0.0)
    throw error(errc::negative_coupling, "omega12 must be >= 0");
  if (std::isnan(p.omega23) || p.omega23 < 0.0)
    throw error(errc::negative_coupling, "omega23 must be >= 0");
  if (std::isnan(p.t_start) || std::isnan(p.t_end) || !(p.t_start < p.t_end))
    throw error(errc::empty_window, "window requires t_start < t_end");
}

// Crossing of the slanted energy with -delta (psi1-psi2 pair) happens at
// -tau, with +delta (psi2-psi3 pair) at +tau.
inline double crossing_tau(const ModelParams& p) { return p.delta / p.beta; }

inline std::pair<double, double> crossing_times(const ModelParams& p) {
  const double tau = crossing_tau(p);
  return {-tau, tau};
}

inline Mat3 hamiltonian_at(const ModelParams& p, double t) {
  Mat3 h;
  h.m[0][0] = -p.delta;
  h.m[0][1] = p.omega12;
  h.m[0][2] = 0.0;
  h.m[1][0] = p.omega12;
  h.m[1][1] = p.beta * t;
  h.m[1][2] = p.omega23;
  h.m[2][0] = 0.0;
  h.m[2][1] = p.omega23;
  h.m[2][2] = p.delta;
  return h;
}

// Conservative bound on max |eigenvalue| of H(t): infinity norm.
inline double spectral_bound(const ModelParams& p, double t) {
  const double r1 = p.delta + p.omega12;
  const double r2 = std::abs(p.beta * t) + p.omega12 + p.omega23;
  const double r3 = p.delta + p.omega23;
  return std::max({r1, r2, r3});
}

// ---- config-file support -------------------------------------------------
// Plain key=value lines; '#' starts a comment; keys match the CLI long-flag
// names. "inf"/"-inf" (or "+inf") are accepted for the window bounds.

inline double parse_time_value(const std::string& s, const std::string& key) {
  std::string v = s;
  if (v == "inf" || v == "+inf")
    return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size())
      throw error(errc::invalid_argument,
                  "trailing characters in value for '" + key + "': " + s);
    return x;
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    throw error(errc::invalid_argument,
                "cannot parse value for '" + key + "': " + s);
  }
}

inline std::map<std::string, std::string> parse_config_text(
    const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string stripped = strip(line);
    if (stripped.empty()) continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw error(errc::invalid_argument,
                  "config line " + std::to_string(lineno) +
                      " is not key=value: " + stripped);
    std::string key = strip(stripped.substr(0, eq));
    std::string val = strip(stripped.substr(eq + 1));
    if (key.empty())
      throw error(errc::invalid_argument,
                  "config line " + std::to_string(lineno) + " has empty key");
    kv[key] = val;
  }
  return kv;
}

inline std::map<std::string, std::string> parse_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw error(errc::invalid_argument, "cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Applies recognized model keys from a config map onto params. Unrecognized
// keys are left for the caller (the CLI also stores output options there).
inline void apply_model_config(const std::map<std::string, std::string>& kv,
                               ModelParams& p) {
  for (const auto& [key, val] : kv) {
    if (key == "omega") {
      p.omega12 = p.omega23 = parse_time_value(val, key);
    } else if (key == "omega12") {
      p.omega12 = parse_time_value(val, key);
    } else if (key == "omega23") {
      p.omega23 = parse_time_value(val, key);
    } else if (key == "delta") {
      p.delta = parse_time_value(val, key);
    } else if (key == "beta") {
      p.beta = parse_time_value(val, key);
    } else if (key == "from") {
      p.t_start = parse_time_value(val, key);
    } else if (key == "to") {
      p.t_end = parse_time_value(val, key);
    }
  }
}

}  // namespace lz3
