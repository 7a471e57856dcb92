// Command-line front end: run, coefficients, compare, convergence.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvsw/app/commands.hpp"

namespace {

struct Common {
  std::string config;
  bool plot = false;
  bool track_flowmap = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Configuration file (key = value text, or JSON / run.json)");
  sub->allow_extras();
  sub->footer("Any configuration key can be overridden with --key=value, e.g. --model.a=3 --grid.n=512.");
}

cvsw::app::RunConfig load(const CLI::App* sub, const Common& c, std::vector<std::string> extra = {}) {
  std::vector<std::string> overrides = sub->remaining();
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  std::optional<std::filesystem::path> file;
  if (!c.config.empty()) file = c.config;
  return cvsw::app::load_config(file, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral solver for the two-component shallow-water system with constant vorticity"};
  app.set_version_flag("--version", std::string(cvsw::app::kVersion));
  app.require_subcommand(1);

  Common run_opts, coef_opts, cmp_opts, conv_opts;

  auto* run_cmd = app.add_subcommand("run", "Integrate one configuration and write snapshots and diagnostics");
  add_common(run_cmd, run_opts);
  run_cmd->add_flag("--plot", run_opts.plot, "Also write SVG plots");
  run_cmd->add_flag("--track-flowmap", run_opts.track_flowmap, "Co-integrate the flow map in Eulerian runs");

  auto* coef_cmd = app.add_subcommand("coefficients", "Print the derived coefficients and constraint residuals");
  add_common(coef_cmd, coef_opts);
  bool coef_json = false, coef_sweep = false;
  std::string coef_out;
  coef_cmd->add_flag("--json", coef_json, "Print JSON instead of a table");
  coef_cmd->add_flag("--sweep", coef_sweep, "Append the closure residual table over a in {1.5,2,2.5,3}, alpha in {0,1}");
  coef_cmd->add_option("--out", coef_out, "Also write the JSON report to this file");

  auto* cmp_cmd = app.add_subcommand("compare", "Run both formulations and compare u at every snapshot");
  add_common(cmp_cmd, cmp_opts);

  auto* conv_cmd = app.add_subcommand("convergence", "Spatial or temporal convergence ladder");
  add_common(conv_cmd, conv_opts);
  std::string ladder;
  conv_cmd->add_option("--ladder", ladder, "spatial or temporal")->check(CLI::IsMember({"spatial", "temporal"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      std::vector<std::string> extra;
      if (run_opts.plot) extra.push_back("--output.plot=true");
      if (run_opts.track_flowmap) extra.push_back("--run.track_flowmap=true");
      return cvsw::app::cmd_run(load(run_cmd, run_opts, extra), std::cout);
    }
    if (coef_cmd->parsed()) {
      std::optional<std::filesystem::path> out;
      if (!coef_out.empty()) out = coef_out;
      return cvsw::app::cmd_coefficients(load(coef_cmd, coef_opts), coef_json, coef_sweep, out, std::cout);
    }
    if (cmp_cmd->parsed()) return cvsw::app::cmd_compare(load(cmp_cmd, cmp_opts), std::cout);
    if (conv_cmd->parsed()) {
      std::vector<std::string> extra;
      if (!ladder.empty()) extra.push_back("--convergence.ladder=" + ladder);
      return cvsw::app::cmd_convergence(load(conv_cmd, conv_opts, extra), std::cout);
    }
  } catch (const cvsw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cvsw::app::kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cvsw::app::kError;
  }
  return cvsw::app::kError;
}
