#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvsw/app/config.hpp"
#include "cvsw/app/output.hpp"
#include "cvsw/app/svg.hpp"
#include "cvsw/model.hpp"
#include "cvsw/timestepper.hpp"

namespace cvsw::app {

/// Exit codes shared by all subcommands.
enum ExitCode : int { kOk = 0, kError = 1, kVerdictFailed = 2 };

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

inline int cmd_run(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const RunOutcome out = run(cfg.initial_state(), cfg.params, cfg.T, cfg.control, cfg.snapshot_every, cfg.run_options());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_run_data(out, cfg, cfg.output_dir);
  if (cfg.plot) {
    write_atomic(cfg.output_dir / "u_waterfall.svg", waterfall_svg(out));
    write_atomic(cfg.output_dir / "diagnostics.svg", diagnostics_svg(out));
  }
  write_atomic(cfg.output_dir / "run.json", run_metadata(out, cfg, wall).dump(2) + "\n");

  log << "status: " << to_string(out.status) << "\n";
  log << "report: " << status_report(out) << "\n";
  log << "t_final: " << fmt(out.t_final) << "  steps: " << out.accepted_steps << " accepted, " << out.rejected_steps
      << " rejected\n";
  log << "output: " << cfg.output_dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// coefficients
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json coefficients_json(const DerivedCoefficients& d, const ModelParams& p, Branch b) {
  nlohmann::ordered_json j;
  j["a"] = p.a;
  j["alpha"] = p.alpha;
  j["branch"] = std::string(to_string(b));
  j["c"] = d.c;
  j["k1"] = d.k1;
  j["k2"] = d.k2;
  j["k3"] = d.k3;
  j["k0"] = d.k0;
  j["beta0_sq"] = d.beta0_sq;
  const auto& r = d.residuals;
  j["residuals"] = {{"burns", r.burns},
                    {"k3_ratio", r.k3_ratio},
                    {"rho_f", r.rho_f},
                    {"m1n", r.m1n},
                    {"beta_k0", r.beta_k0},
                    {"beta_dual", r.beta_dual},
                    {"max_asserted", r.max_asserted()}};
  j["reported"] = {{"m1p_2(a-2)k1", r.m1p}, {"m1p_(a-2)k1", r.m1p_variant}};
  return j;
}

inline std::string coefficients_table(const DerivedCoefficients& d, const ModelParams& p, Branch b) {
  std::ostringstream s;
  s << std::setprecision(17);
  auto row = [&s](const std::string& name, double v) { s << "  " << std::left << std::setw(26) << name << v << "\n"; };
  s << "coefficients (a = " << p.a << ", alpha = " << p.alpha << ", branch = " << to_string(b) << ")\n";
  row("c", d.c);
  row("k1", d.k1);
  row("k2", d.k2);
  row("k3", d.k3);
  row("k0", d.k0);
  row("beta0^2", d.beta0_sq);
  s << "asserted residuals\n";
  const auto& r = d.residuals;
  row("c^2 - alpha c - 1", r.burns);
  row("k3/k1 - 1/(6(c-alpha))", r.k3_ratio);
  row("rho-f closure", r.rho_f);
  row("m1n closure", r.m1n);
  row("beta0^2 - (k0 + 1/2)", r.beta_k0);
  row("beta0^2 dual form", r.beta_dual);
  s << "reported residuals (not asserted)\n";
  row("m1p with 2(a-2)k1", r.m1p);
  row("m1p with (a-2)k1", r.m1p_variant);
  return s.str();
}

/// Residuals of the momentum closure over a in {1.5, 2, 2.5, 3}, alpha in {0, 1}.
inline std::string m1p_sweep_table(Branch b) {
  std::ostringstream s;
  s << "a,alpha,c,k1,m1p_2(a-2)k1,m1p_(a-2)k1,max_asserted\n";
  for (double a : {1.5, 2.0, 2.5, 3.0}) {
    for (double al : {0.0, 1.0}) {
      const ModelParams p(a, al, 1.0);
      const auto d = derive_coefficients(p, b);
      s << fmt(a) << ',' << fmt(al) << ',' << fmt(d.c) << ',' << fmt(d.k1) << ',' << fmt(d.residuals.m1p) << ','
        << fmt(d.residuals.m1p_variant) << ',' << fmt(d.residuals.max_asserted()) << '\n';
    }
  }
  return s.str();
}

inline int cmd_coefficients(const RunConfig& cfg, bool json, bool sweep, const std::optional<std::filesystem::path>& out_file,
                            std::ostream& log) {
  const auto d = derive_coefficients(cfg.params, cfg.branch);
  const auto j = coefficients_json(d, cfg.params, cfg.branch);
  if (json) {
    log << j.dump(2) << "\n";
  } else {
    log << coefficients_table(d, cfg.params, cfg.branch);
  }
  if (sweep) log << "\n" << m1p_sweep_table(cfg.branch);
  if (out_file) write_atomic(*out_file, j.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct Comparison {
  RunOutcome eulerian;
  RunOutcome lagrangian;
  std::vector<std::pair<double, double>> trace;  ///< (t, ||u_euler - u_lagr||_inf)
  std::string verdict;                            ///< pass, fail or incomplete
  double max_diff = 0.0;
};

inline Comparison compare_formulations(const RunConfig& cfg) {
  Comparison c;
  const EulerianState init = cfg.initial_state();
  RunOptions eo = cfg.run_options();
  eo.formulation = Formulation::eulerian;
  eo.track_flowmap = false;
  RunOptions lo = eo;
  lo.formulation = Formulation::lagrangian;
  c.eulerian = run(init, cfg.params, cfg.T, cfg.control, cfg.snapshot_every, eo);
  c.lagrangian = run(init, cfg.params, cfg.T, cfg.control, cfg.snapshot_every, lo);

  const auto& a = c.eulerian.trajectory;
  const auto& b = c.lagrangian.trajectory;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i].t != b[i].t) break;
    const double d = max_abs_diff(a[i].state.velocity(), b[i].state.velocity());
    c.trace.emplace_back(a[i].t, d);
    c.max_diff = std::max(c.max_diff, d);
  }
  const bool complete = c.eulerian.status == RunStatus::completed && c.lagrangian.status == RunStatus::completed &&
                        !c.trace.empty() && c.trace.back().first == cfg.T;
  if (!complete) {
    c.verdict = "incomplete";
  } else {
    c.verdict = c.max_diff <= cfg.compare_threshold ? "pass" : "fail";
  }
  return c;
}

inline int cmd_compare(const RunConfig& cfg, std::ostream& log) {
  const Comparison c = compare_formulations(cfg);
  std::ostringstream csv;
  csv << "t,diff_u_inf\n";
  for (const auto& [t, d] : c.trace) csv << fmt(t) << ',' << fmt(d) << '\n';
  write_atomic(cfg.output_dir / "compare.csv", csv.str());

  nlohmann::ordered_json j;
  j["config"] = config_echo(cfg.raw);
  j["verdict"] = c.verdict;
  j["threshold"] = cfg.compare_threshold;
  j["max_diff"] = c.max_diff;
  j["final_diff"] = c.trace.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(c.trace.back().second);
  j["eulerian"] = {{"status", std::string(to_string(c.eulerian.status))}, {"t_final", c.eulerian.t_final}};
  j["lagrangian"] = {{"status", std::string(to_string(c.lagrangian.status))}, {"t_final", c.lagrangian.t_final}};
  j["version"] = kVersion;
  write_atomic(cfg.output_dir / "compare.json", j.dump(2) + "\n");

  log << "max ||u_euler - u_lagr||_inf = " << fmt(c.max_diff) << " (threshold " << fmt(cfg.compare_threshold) << ")\n";
  log << "verdict: " << c.verdict << "\n";
  return c.verdict == "pass" ? kOk : kVerdictFailed;
}

// ---------------------------------------------------------------------------
// convergence
// ---------------------------------------------------------------------------

inline const std::vector<std::size_t> kSpatialLadder{64, 128, 256, 512};
inline constexpr std::size_t kSpatialReference = 1024;
inline const std::vector<double> kTemporalLadder{4e-3, 2e-3, 1e-3, 5e-4};
inline constexpr double kTemporalReference = 1e-4;

struct ConvergenceResult {
  std::string ladder;
  std::vector<double> params;  ///< n or dt
  std::vector<double> errors;
  std::optional<double> slope;  ///< least-squares log-log slope (temporal)
  bool pass = false;
  std::string detail;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

namespace detail {

inline EulerianState final_state(const RunConfig& cfg, std::size_t n, const StepControl& ctl) {
  RunOptions o = cfg.run_options();
  o.track_flowmap = false;
  const RunOutcome out = run(cfg.initial_state(n), cfg.params, cfg.T, ctl, 0.0, o);
  if (out.status != RunStatus::completed) {
    throw Error("ladder run stopped early (" + std::string(to_string(out.status)) + " at t = " + fmt(out.t_final) + ")");
  }
  return out.trajectory.back().state;
}

}  // namespace detail

/// Error at T of each n in the ladder against n = 1024, compared at the coarse nodes.
inline ConvergenceResult spatial_convergence(const RunConfig& cfg) {
  ConvergenceResult r;
  r.ladder = "spatial";
  const EulerianState ref = detail::final_state(cfg, kSpatialReference, cfg.control);
  const Field uref = ref.velocity();
  for (std::size_t n : kSpatialLadder) {
    const EulerianState s = detail::final_state(cfg, n, cfg.control);
    const Field u = s.velocity();
    const std::size_t stride = kSpatialReference / n;
    double e = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      e = std::max({e, std::abs(u[j] - uref[j * stride]), std::abs(s.rho[j] - ref.rho[j * stride])});
    }
    r.params.push_back(static_cast<double>(n));
    r.errors.push_back(e);
  }
  r.pass = true;
  for (std::size_t i = 1; i < r.errors.size(); ++i) {
    if (!(r.errors[i] <= std::max(r.errors[i - 1] / 10.0, cfg.convergence_floor))) r.pass = false;
  }
  r.detail = "each doubling of n must cut the error by 10x or reach the floor " + fmt(cfg.convergence_floor);
  return r;
}

/// RK4 error at T for each dt in the ladder against dt = 1e-4, with the log-log slope.
inline ConvergenceResult temporal_convergence(const RunConfig& cfg) {
  ConvergenceResult r;
  r.ladder = "temporal";
  StepControl ctl = cfg.control;
  ctl.method = StepMethod::rk4;
  ctl.dt_min = std::min(ctl.dt_min, kTemporalReference);
  ctl.dt = kTemporalReference;
  const EulerianState ref = detail::final_state(cfg, cfg.grid_n, ctl);
  for (double dt : kTemporalLadder) {
    ctl.dt = dt;
    const EulerianState s = detail::final_state(cfg, cfg.grid_n, ctl);
    r.params.push_back(dt);
    r.errors.push_back(std::max(max_abs_diff(s.velocity(), ref.velocity()), max_abs_diff(s.rho, ref.rho)));
  }
  r.slope = loglog_slope(r.params, r.errors);
  r.pass = std::abs(*r.slope - 4.0) <= 0.3;
  r.detail = "slope must be 4.0 +- 0.3";
  return r;
}

inline int cmd_convergence(const RunConfig& cfg, std::ostream& log) {
  const ConvergenceResult r = cfg.ladder == "spatial" ? spatial_convergence(cfg) : temporal_convergence(cfg);
  std::ostringstream csv;
  csv << "ladder," << (r.ladder == "spatial" ? "n" : "dt") << ",error,ratio\n";
  for (std::size_t i = 0; i < r.errors.size(); ++i) {
    csv << r.ladder << ',' << fmt(r.params[i]) << ',' << fmt(r.errors[i]) << ','
        << (i == 0 ? std::string("nan") : fmt(r.errors[i - 1] / r.errors[i])) << '\n';
  }
  write_atomic(cfg.output_dir / "convergence.csv", csv.str());

  nlohmann::ordered_json j;
  j["config"] = config_echo(cfg.raw);
  j["ladder"] = r.ladder;
  j["reference"] = r.ladder == "spatial" ? static_cast<double>(kSpatialReference) : kTemporalReference;
  j["params"] = r.params;
  j["errors"] = r.errors;
  j["slope"] = r.slope ? nlohmann::ordered_json(*r.slope) : nlohmann::ordered_json(nullptr);
  j["verdict"] = r.pass ? "pass" : "fail";
  j["rule"] = r.detail;
  j["version"] = kVersion;
  write_atomic(cfg.output_dir / "convergence.json", j.dump(2) + "\n");

  log << csv.str();
  if (r.slope) log << "slope: " << fmt(*r.slope) << "\n";
  log << "verdict: " << (r.pass ? "pass" : "fail") << " (" << r.detail << ")\n";
  return r.pass ? kOk : kVerdictFailed;
}

}  // namespace cvsw::app
