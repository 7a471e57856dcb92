#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <unistd.h>

#include <json.hpp>

#include "cvsw/app/config.hpp"
#include "cvsw/diagnostics.hpp"
#include "cvsw/timestepper.hpp"

namespace cvsw::app {

#ifndef CVSW_VERSION
#define CVSW_VERSION "unknown"
#endif

inline constexpr const char* kVersion = CVSW_VERSION;

/// Write through a temporary sibling and rename it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

/// Round-trip formatting of a double; NaN and infinities as nan/inf/-inf.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "nan"; }

inline std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_%.6f.csv", t);
  return buf;
}

/// x,u,rho,m at the grid nodes.
inline std::string snapshot_csv(const EulerianState& s) {
  std::ostringstream out;
  out << "x,u,rho,m\n";
  const Field u = s.velocity();
  const SpectralGrid& g = s.grid();
  for (std::size_t j = 0; j < g.size(); ++j) {
    out << fmt(g.node(j)) << ',' << fmt(u[j]) << ',' << fmt(s.rho[j]) << ',' << fmt(s.m[j]) << '\n';
  }
  return out.str();
}

inline const char* kDiagnosticsColumns = "t,energy_a2,mean_u,casimir,min_rho,max_ux,h0,h1,h2,lemma61_dev";

/**
 * @brief Diagnostics CSV: a '#'-prefixed JSON line describing columns and
 * parameters, the column header, then one row per snapshot.
 */
inline std::string diagnostics_csv(const RunOutcome& out, const RunConfig& cfg) {
  nlohmann::ordered_json header;
  header["columns"] = {
      {{"name", "t"}, {"meaning", "simulated time"}},
      {{"name", "energy_a2"}, {"meaning", "int u_x^2 + int (u - alpha/2)^2 + alpha^2/2 + kappa int rho^2"}},
      {{"name", "mean_u"}, {"meaning", "int u dx"}},
      {{"name", "casimir"}, {"meaning", "int rho^(1/(a-1)) dx; nan when rho is not strictly positive"}},
      {{"name", "min_rho"}, {"meaning", "min over nodes of rho"}},
      {{"name", "max_ux"}, {"meaning", "max over nodes of |u_x|"}},
      {{"name", "h0"}, {"meaning", "||m||^2_{H^0} + ||rho||^2_{H^1}"}},
      {{"name", "h1"}, {"meaning", "||m||^2_{H^1} + ||rho||^2_{H^2}"}},
      {{"name", "h2"}, {"meaning", "||m||^2_{H^2} + ||rho||^2_{H^3}"}},
      {{"name", "lemma61_dev"},
       {"meaning", "max |sigma phi_x^(a-1) - rho_0| over nodes; nan without a flow map"}},
  };
  header["config"] = config_echo(cfg.raw, false);
  header["version"] = kVersion;

  std::ostringstream s;
  s << "# " << header.dump() << '\n' << kDiagnosticsColumns << '\n';
  for (const DiagnosticsRecord& r : out.diagnostics) {
    auto h = [&r](int k) {
      auto it = r.h_norms.find(k);
      return it == r.h_norms.end() ? std::string("nan") : fmt(it->second);
    };
    s << fmt(r.t) << ',' << fmt(r.energy_a2) << ',' << fmt(r.mean_u) << ',' << fmt(r.casimir) << ','
      << fmt(r.min_rho) << ',' << fmt(r.max_ux) << ',' << h(0) << ',' << h(1) << ',' << h(2) << ','
      << fmt(r.lemma61_deviation) << '\n';
  }
  return s.str();
}

/// (t, ||u_x||_inf) after every accepted step.
inline std::string ux_trace_csv(const RunOutcome& out) {
  std::ostringstream s;
  s << "t,max_ux\n";
  for (const auto& [t, ux] : out.ux_trace) s << fmt(t) << ',' << fmt(ux) << '\n';
  return s.str();
}

inline PositivityReport positivity_of(const RunOutcome& out) {
  std::vector<double> times;
  std::vector<Field> rho;
  for (const Snapshot& s : out.trajectory) {
    times.push_back(s.t);
    rho.push_back(s.state.rho);
  }
  return positivity_report(times, rho);
}

/// Human-readable summary of the outcome; detection is phrased as a criterion, not a proof.
inline std::string status_report(const RunOutcome& out) {
  switch (out.status) {
    case RunStatus::completed:
      return "completed";
    case RunStatus::blowup_detected:
      return "blow-up criterion exceeded at t = " + fmt(out.t_final) + " (" + out.message + ")";
    case RunStatus::mesh_degenerate:
      return "flow map degenerate at t = " + fmt(out.t_final) + " (" + out.message + ")";
  }
  return "";
}

inline nlohmann::ordered_json run_metadata(const RunOutcome& out, const RunConfig& cfg, double wall_seconds) {
  nlohmann::ordered_json j;
  j["config"] = config_echo(cfg.raw);
  j["status"] = std::string(to_string(out.status));
  j["report"] = status_report(out);
  j["t_final"] = out.t_final;
  j["accepted_steps"] = out.accepted_steps;
  j["rejected_steps"] = out.rejected_steps;
  if (!out.ux_trace.empty()) j["final_max_ux"] = out.ux_trace.back().second;
  const PositivityReport pos = positivity_of(out);
  nlohmann::ordered_json pj;
  pj["applicable"] = pos.applicable;
  pj["preserved"] = pos.preserved;
  pj["first_violation_t"] = pos.first_violation_t ? nlohmann::ordered_json(*pos.first_violation_t) : nullptr;
  j["positivity"] = pj;
  j["wall_time_s"] = wall_seconds;
  j["version"] = kVersion;
  return j;
}

/// Snapshot files, diagnostics.csv and ux_trace.csv into `dir`.
inline void write_run_data(const RunOutcome& out, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const Snapshot& s : out.trajectory) write_atomic(dir / snapshot_name(s.t), snapshot_csv(s.state));
  write_atomic(dir / "diagnostics.csv", diagnostics_csv(out, cfg));
  write_atomic(dir / "ux_trace.csv", ux_trace_csv(out));
}

}  // namespace cvsw::app
