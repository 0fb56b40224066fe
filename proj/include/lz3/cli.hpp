#pragma once

// Command-line surface: evolve / table / sweep / validate subcommands over
// flags and key=value config files (flags win). Exit codes: 0 success,
// 2 usage or validation error, 3 numerical failure. The LZ3_OUT_DIR
// environment variable sets the default output directory; "-o -" streams
// to stdout instead of a file.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lz3/checks.hpp"
#include "lz3/errors.hpp"
#include "lz3/format.hpp"
#include "lz3/integrator.hpp"
#include "lz3/model.hpp"
#include "lz3/probabilities.hpp"
#include "lz3/sweep.hpp"

namespace lz3 {
namespace detail {

inline std::string resolve_output_path(const std::string& user,
                                       const std::string& default_name) {
  if (!user.empty()) return user;
  const char* dir = std::getenv("LZ3_OUT_DIR");
  const std::filesystem::path base = (dir && *dir) ? dir : ".";
  return (base / default_name).string();
}

inline void check_config_keys(const std::map<std::string, std::string>& kv,
                              const std::set<std::string>& extra) {
  static const std::set<std::string> model_keys = {
      "omega", "omega12", "omega23", "delta", "beta", "from", "to"};
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!model_keys.count(key) && !extra.count(key))
      throw error(errc::invalid_argument, "unknown config key '" + key + "'");
  }
}

inline void config_double(const std::map<std::string, std::string>& kv,
                          const std::string& key, double& target) {
  if (const auto it = kv.find(key); it != kv.end())
    target = parse_time_value(it->second, key);
}

inline void config_int(const std::map<std::string, std::string>& kv,
                       const std::string& key, int& target) {
  if (const auto it = kv.find(key); it != kv.end()) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(it->second, &pos);
      if (pos != it->second.size())
        throw error(errc::invalid_argument,
                    "trailing characters in value for '" + key + "'");
      target = v;
    } catch (const error&) {
      throw;
    } catch (const std::exception&) {
      throw error(errc::invalid_argument,
                  "cannot parse integer for '" + key + "': " + it->second);
    }
  }
}

inline void config_string(const std::map<std::string, std::string>& kv,
                          const std::string& key, std::string& target) {
  if (const auto it = kv.find(key); it != kv.end()) target = it->second;
}

inline void print_table(std::ostream& os, const TransitionTable& t) {
  static const char* labels[3] = {"\xcf\x88\xe2\x82\x81",    // psi_1
                                  "\xcf\x88\xe2\x82\x82",    // psi_2
                                  "\xcf\x88\xe2\x82\x83"};   // psi_3
  os << "kind: " << table_kind_name(t.kind) << '\n';
  os << "      ";
  for (int n = 0; n < 3; ++n) {
    std::string h = labels[n];
    if (n < 2) h.append(22, ' ');  // label renders as 2 columns; pad to 24
    os << h;
  }
  os << '\n';
  for (int m = 0; m < 3; ++m) {
    std::string lead = labels[m];
    lead.append(4, ' ');
    os << lead;
    for (int n = 0; n < 3; ++n) {
      std::string cell = format_double(t.P[m][n]);
      if (n < 2 && cell.size() < 24) cell.append(24 - cell.size(), ' ');
      os << cell;
    }
    os << '\n';
  }
}

inline void write_trajectory_json(std::ostream& os, const ModelParams& p,
                                  int start_state, const Trajectory& tr) {
  nlohmann::json doc;
  doc["metadata"] = params_json(p);
  doc["metadata"]["start_state"] = start_state;
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : tr.samples) {
    samples.push_back(
        {{"t", s.t},
         {"P", {s.populations[0], s.populations[1], s.populations[2]}},
         {"re",
          {s.amplitudes[0].real(), s.amplitudes[1].real(),
           s.amplitudes[2].real()}},
         {"im",
          {s.amplitudes[0].imag(), s.amplitudes[1].imag(),
           s.amplitudes[2].imag()}}});
  }
  doc["samples"] = std::move(samples);
  os << doc.dump(2) << '\n';
}

inline void write_figure2_json(std::ostream& os, const ModelParams& p,
                               const Figure2& fig) {
  nlohmann::json doc;
  doc["metadata"] = params_json(p);
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < fig.diabatic.samples.size(); ++i) {
    const auto& d = fig.diabatic.samples[i];
    const auto& a = fig.adiabatic.samples[i];
    samples.push_back(
        {{"t", d.t},
         {"P_diabatic",
          {d.populations[0], d.populations[1], d.populations[2]}},
         {"P_adiabatic",
          {a.populations[0], a.populations[1], a.populations[2]}}});
  }
  doc["samples"] = std::move(samples);
  os << doc.dump(2) << '\n';
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"three-state level-crossing model: numeric propagation, "
               "analytic propagators, transition tables, sweeps"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "extra diagnostics on stderr");

  struct ParamFlags {
    double omega = 0, omega12 = 0, omega23 = 0, delta = 0, beta = 0;
    std::string from, to;
    CLI::Option *o_omega = nullptr, *o_omega12 = nullptr, *o_omega23 = nullptr,
                *o_delta = nullptr, *o_beta = nullptr, *o_from = nullptr,
                *o_to = nullptr;
    void add(CLI::App* sub) {
      o_omega = sub->add_option("--omega", omega,
                                "both couplings (units of sqrt(beta))");
      o_omega12 = sub->add_option("--omega12", omega12, "psi1-psi2 coupling");
      o_omega23 = sub->add_option("--omega23", omega23, "psi2-psi3 coupling");
      o_delta = sub->add_option("--delta", delta, "half energy splitting");
      o_beta = sub->add_option("--beta", beta, "slope of the middle energy");
      o_from =
          sub->add_option("--from", from, "window start (number or -inf)");
      o_to = sub->add_option("--to", to, "window end (number or inf)");
    }
    void apply(ModelParams& p) const {
      if (o_omega->count()) p.omega12 = p.omega23 = omega;
      if (o_omega12->count()) p.omega12 = omega12;
      if (o_omega23->count()) p.omega23 = omega23;
      if (o_delta->count()) p.delta = delta;
      if (o_beta->count()) p.beta = beta;
      if (o_from->count()) p.t_start = parse_time_value(from, "from");
      if (o_to->count()) p.t_end = parse_time_value(to, "to");
    }
  };

  // ---- evolve ----
  auto* ev = app.add_subcommand(
      "evolve", "integrate one trajectory and write it as CSV/JSON");
  ev->fallthrough();
  ParamFlags ev_p;
  ev_p.add(ev);
  std::string ev_config, ev_preset, ev_output, ev_format = "csv";
  int ev_start = 0;
  double ev_dt = 0, ev_rtol = 0, ev_atol = 0;
  ev->add_option("--config", ev_config, "key=value parameter file");
  ev->add_option("--preset", ev_preset, "figure preset")
      ->check(CLI::IsMember({"fig2"}));
  auto* ev_o_start =
      ev->add_option("--start-state", ev_start, "initial diabatic state 1..3");
  auto* ev_o_dt =
      ev->add_option("--dt", ev_dt, "sample spacing (default span/2000)");
  auto* ev_o_rtol = ev->add_option("--rtol", ev_rtol, "relative tolerance");
  auto* ev_o_atol = ev->add_option("--atol", ev_atol, "absolute tolerance");
  ev->add_option("-o,--output", ev_output, "output path ('-' for stdout)");
  ev->add_option("--format", ev_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // ---- table ----
  auto* tb = app.add_subcommand(
      "table", "print a 3x3 transition-probability table to stdout");
  tb->fallthrough();
  ParamFlags tb_p;
  tb_p.add(tb);
  std::string tb_config, tb_kind;
  double tb_T = 0, tb_t = 0;
  tb->add_option("--config", tb_config, "key=value parameter file");
  tb->add_option("--kind", tb_kind,
                 "do-exact | finite-avg | do-time | finite-full")
      ->required()
      ->check(CLI::IsMember({"do-exact", "finite-avg", "do-time",
                             "finite-full"}));
  auto* tb_o_T =
      tb->add_option("--T", tb_T, "window half-width (finite-avg/full)");
  auto* tb_o_t = tb->add_option("--t", tb_t, "evaluation time (do-time)");

  // ---- sweep ----
  auto* sw = app.add_subcommand(
      "sweep", "scan a parameter axis and tabulate observables");
  sw->fallthrough();
  ParamFlags sw_p;
  sw_p.add(sw);
  std::string sw_config, sw_preset, sw_axis, sw_spacing, sw_output,
      sw_format = "csv";
  double sw_lo = 0, sw_hi = 0, sw_rtol = 0, sw_atol = 0;
  int sw_n = 0, sw_start = 0;
  std::vector<std::string> sw_obs;
  sw->add_option("--config", sw_config, "key=value parameter file");
  sw->add_option("--preset", sw_preset, "figure preset")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5"}));
  auto* sw_o_axis = sw->add_option("--axis", sw_axis,
                                   "T | delta | time | coupling");
  auto* sw_o_lo = sw->add_option("--lo", sw_lo, "axis start");
  auto* sw_o_hi = sw->add_option("--hi", sw_hi, "axis end");
  auto* sw_o_n =
      sw->add_option("--n", sw_n, "grid points (0 = auto by local period)");
  auto* sw_o_spacing =
      sw->add_option("--spacing", sw_spacing, "linear or log")
          ->check(CLI::IsMember({"linear", "log"}));
  auto* sw_o_obs = sw->add_option("--observables", sw_obs,
                                  "comma-separated observable names");
  sw_o_obs->delimiter(',');
  auto* sw_o_start =
      sw->add_option("--start-state", sw_start, "time-axis start state 1..3");
  auto* sw_o_rtol = sw->add_option("--rtol", sw_rtol, "oracle rel tolerance");
  auto* sw_o_atol = sw->add_option("--atol", sw_atol, "oracle abs tolerance");
  sw->add_option("-o,--output", sw_output, "output path ('-' for stdout)");
  sw->add_option("--format", sw_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // ---- validate ----
  auto* va = app.add_subcommand(
      "validate", "run the named cross-check battery and report pass/fail");
  va->fallthrough();
  bool va_quick = false, va_full = false;
  va->add_flag("--quick", va_quick, "symmetry/algebra checks only (< 10 s)");
  va->add_flag("--full", va_full, "also run analytic-vs-oracle comparisons");

  std::vector<const char*> cargv;
  cargv.reserve(args.size() + 1);
  cargv.push_back("lz3");
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  // Streams any deliverable either to `out` ("-") or to a file, default
  // directory from LZ3_OUT_DIR.
  const auto deliver =
      [&](const std::string& user_path, const std::string& default_name,
          const std::function<void(std::ostream&)>& writer) -> int {
    if (user_path == "-") {
      writer(out);
      return 0;
    }
    const std::string path =
        detail::resolve_output_path(user_path, default_name);
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      err << "error: cannot open output file: " << path << '\n';
      return 2;
    }
    writer(f);
    f.flush();
    if (!f) {
      err << "error: write failed: " << path << '\n';
      return 2;
    }
    out << "wrote " << path << '\n';
    return 0;
  };

  const auto cmd_evolve = [&]() -> int {
    ModelParams mp;
    int start_state = 0;
    double rtol = 1e-10, atol = 1e-12, dt = 0.0;
    if (!ev_preset.empty()) {  // fig2 caption parameters, natural units
      mp.omega12 = mp.omega23 = 1.0;
      mp.delta = 1.0;
      mp.beta = 1.0;
      start_state = 1;
    }
    if (!ev_config.empty()) {
      const auto kv = parse_config_file(ev_config);
      detail::check_config_keys(kv, {"start-state", "rtol", "atol", "dt"});
      apply_model_config(kv, mp);
      detail::config_int(kv, "start-state", start_state);
      detail::config_double(kv, "rtol", rtol);
      detail::config_double(kv, "atol", atol);
      detail::config_double(kv, "dt", dt);
    }
    ev_p.apply(mp);
    if (ev_o_start->count()) start_state = ev_start;
    if (ev_o_rtol->count()) rtol = ev_rtol;
    if (ev_o_atol->count()) atol = ev_atol;
    if (ev_o_dt->count()) dt = ev_dt;
    if (start_state == 0) {
      err << "error: --start-state is required\n";
      return 2;
    }
    if (start_state < 1 || start_state > 3) {
      err << "error: start-state must be 1, 2 or 3\n";
      return 2;
    }
    validate(mp);

    if (!ev_preset.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const Figure2 fig = figure2_trajectories(
          mp, start_state, std::isfinite(mp.t_start) ? mp.t_start : nan,
          std::isfinite(mp.t_end) ? mp.t_end : nan, 2001, rtol, atol);
      if (verbose) {
        const auto& last = fig.diabatic.samples.back();
        err << "final diabatic populations: "
            << detail::format_double(last.populations[0]) << ' '
            << detail::format_double(last.populations[1]) << ' '
            << detail::format_double(last.populations[2]) << '\n';
      }
      const std::string name =
          ev_format == "csv" ? "figure2.csv" : "figure2.json";
      return deliver(ev_output, name, [&](std::ostream& os) {
        if (ev_format == "csv")
          write_figure2_csv(os, fig);
        else
          detail::write_figure2_json(os, mp, fig);
      });
    }

    double t_begin, t_end;
    StateVector init;
    if (std::isinf(mp.t_start)) {
      const double m = detail::do_start_magnitude(mp);
      init = do_start_state(mp, start_state, m);
      t_begin = -m;
    } else {
      init.basis = Basis::diabatic;
      init.t = mp.t_start;
      init.amplitudes = {cplx(start_state == 1 ? 1.0 : 0.0, 0.0),
                         cplx(start_state == 2 ? 1.0 : 0.0, 0.0),
                         cplx(start_state == 3 ? 1.0 : 0.0, 0.0)};
      t_begin = mp.t_start;
    }
    t_end =
        std::isinf(mp.t_end) ? detail::do_start_magnitude(mp) : mp.t_end;
    if (!(t_begin < t_end))
      throw error(errc::empty_window,
                  "emulated window is empty; give a finite 'to'");
    if (dt <= 0.0) dt = (t_end - t_begin) / 2000.0;
    const IntegrationResult res =
        integrate(mp, init, t_begin, t_end, rtol, atol, dt);
    if (verbose) {
      const Real3 pf = populations(res.state.amplitudes);
      err << "final populations: " << detail::format_double(pf[0]) << ' '
          << detail::format_double(pf[1]) << ' '
          << detail::format_double(pf[2])
          << "; norm drift: " << detail::format_double(res.norm_drift)
          << '\n';
    }
    const std::string name =
        ev_format == "csv" ? "trajectory.csv" : "trajectory.json";
    return deliver(ev_output, name, [&](std::ostream& os) {
      if (ev_format == "csv")
        write_trajectory_csv(os, res.trajectory);
      else
        detail::write_trajectory_json(os, mp, start_state, res.trajectory);
    });
  };

  const auto cmd_table = [&]() -> int {
    ModelParams mp;
    double T = 0.0, t = 0.0;
    bool have_T = false, have_t = false;
    if (!tb_config.empty()) {
      const auto kv = parse_config_file(tb_config);
      detail::check_config_keys(kv, {"T", "t"});
      apply_model_config(kv, mp);
      if (kv.count("T")) {
        detail::config_double(kv, "T", T);
        have_T = true;
      }
      if (kv.count("t")) {
        detail::config_double(kv, "t", t);
        have_t = true;
      }
    }
    tb_p.apply(mp);
    if (tb_o_T->count()) {
      T = tb_T;
      have_T = true;
    }
    if (tb_o_t->count()) {
      t = tb_t;
      have_t = true;
    }
    TransitionTable table;
    bool warn = false;
    if (tb_kind == "do-exact") {
      table = do_exact_table(mp);
    } else if (tb_kind == "finite-avg") {
      if (!have_T) {
        err << "error: --kind finite-avg requires --T\n";
        return 2;
      }
      table = finite_avg_table(mp, T, &warn);
    } else if (tb_kind == "do-time") {
      if (!have_t) {
        err << "error: --kind do-time requires --t\n";
        return 2;
      }
      table = do_time_table(mp, t, &warn);
    } else {  // finite-full
      double a, b;
      if (have_T) {
        a = -T;
        b = T;
      } else if (mp.finite_window()) {
        a = mp.t_start;
        b = mp.t_end;
      } else {
        err << "error: --kind finite-full requires --T or --from/--to\n";
        return 2;
      }
      table = finite_full_table(mp, a, b);
    }
    detail::print_table(out, table);
    if (warn)
      err << "note: argument below 10*max(tau, 1/sqrt(beta)); the "
             "asymptotic average is marginal here\n";
    if (table.out_of_range)
      err << "note: an asymptotic entry fell outside [0, 1]\n";
    return 0;
  };

  const auto cmd_sweep = [&]() -> int {
    if (sw_preset == "fig2") {
      ModelParams mp;  // caption parameters, natural units
      const Figure2 fig = figure2_trajectories(mp, 1);
      const std::string name =
          sw_format == "csv" ? "figure2.csv" : "figure2.json";
      return deliver(sw_output, name, [&](std::ostream& os) {
        if (sw_format == "csv")
          write_figure2_csv(os, fig);
        else
          detail::write_figure2_json(os, mp, fig);
      });
    }
    SweepSpec sp;
    if (!sw_preset.empty()) sp = preset_sweep(sw_preset);
    if (!sw_config.empty()) {
      const auto kv = parse_config_file(sw_config);
      detail::check_config_keys(
          kv, {"axis", "lo", "hi", "n", "spacing", "observables",
               "start-state", "rtol", "atol"});
      apply_model_config(kv, sp.base);
      std::string s;
      detail::config_string(kv, "axis", s);
      if (!s.empty()) sp.axis = parse_axis(s);
      detail::config_double(kv, "lo", sp.lo);
      detail::config_double(kv, "hi", sp.hi);
      detail::config_int(kv, "n", sp.n_points);
      s.clear();
      detail::config_string(kv, "spacing", s);
      if (!s.empty()) sp.spacing = parse_spacing(s);
      s.clear();
      detail::config_string(kv, "observables", s);
      if (!s.empty()) {
        sp.observables.clear();
        std::size_t pos = 0;
        while (pos <= s.size()) {
          const auto comma = s.find(',', pos);
          sp.observables.push_back(s.substr(
              pos, comma == std::string::npos ? std::string::npos
                                              : comma - pos));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
      }
      detail::config_int(kv, "start-state", sp.start_state);
      detail::config_double(kv, "rtol", sp.rtol);
      detail::config_double(kv, "atol", sp.atol);
    }
    sw_p.apply(sp.base);
    if (sw_o_axis->count()) sp.axis = parse_axis(sw_axis);
    if (sw_o_lo->count()) sp.lo = sw_lo;
    if (sw_o_hi->count()) sp.hi = sw_hi;
    if (sw_o_n->count()) sp.n_points = sw_n;
    if (sw_o_spacing->count()) sp.spacing = parse_spacing(sw_spacing);
    if (sw_o_obs->count()) sp.observables = sw_obs;
    if (sw_o_start->count()) sp.start_state = sw_start;
    if (sw_o_rtol->count()) sp.rtol = sw_rtol;
    if (sw_o_atol->count()) sp.atol = sw_atol;
    const SweepResult res = run_sweep(sp);
    if (verbose)
      err << "sweep: " << res.rows.size() << " rows in "
          << detail::format_double(res.runtime_seconds) << " s\n";
    const std::string name = sw_format == "csv" ? "sweep.csv" : "sweep.json";
    return deliver(sw_output, name, [&](std::ostream& os) {
      if (sw_format == "csv")
        write_sweep_csv(os, res);
      else
        write_sweep_json(os, res);
    });
  };

  const auto cmd_validate = [&]() -> int {
    const std::vector<CheckResult> checks =
        va_full ? run_full_checks() : run_quick_checks();
    std::size_t passed = 0;
    for (const auto& c : checks) {
      out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " - " << c.detail
          << '\n';
      passed += c.passed ? 1 : 0;
    }
    out << passed << '/' << checks.size() << " checks passed\n";
    return passed == checks.size() ? 0 : 1;
  };

  try {
    if (ev->parsed()) return cmd_evolve();
    if (tb->parsed()) return cmd_table();
    if (sw->parsed()) return cmd_sweep();
    if (va->parsed()) return cmd_validate();
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical_failure(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << "error: no subcommand given\n";
  return 2;
}

}  // namespace lz3
