#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xsite/app/commands.hpp"
#include "xsite/app/service.hpp"

namespace app = xsite::app;

int main(int argc, char** argv) {
  CLI::App cli{"Cross-site experiment design, estimation and simulation"};
  cli.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  auto* simulate = cli.add_subcommand("simulate", "Run a synthetic sweep from a config file");
  simulate->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--seed", seed, "Override the config seed");

  app::EstimateOptions est;
  std::string bins_text, bounds_text, json_out;
  auto* estimate = cli.add_subcommand("estimate", "Estimate effects from a site-1 log (CSV)");
  estimate->add_option("--log", est.log_path, "Site-1 log CSV")->required()->check(CLI::ExistingFile);
  estimate->add_option("--alpha", est.alpha, "Site-2 allocation ratio in C1")->required();
  estimate->add_option("--bins", bins_text, "Per-bin corrected effects, e.g. x1:0,1.5");
  estimate->add_option("--bounds", bounds_text, "Outcome range lo,hi for the Hoeffding interval");
  estimate->add_flag("--binary", est.binary, "Outcomes must be 0/1");
  estimate->add_option("--level", est.level, "Confidence level")->check(CLI::Range(0.5, 0.9999));
  estimate->add_option("--json", json_out, "Also write the JSON result here");

  std::string host = "127.0.0.1", state_dir = "xsite-state";
  int port = 8080;
  std::size_t workers = 2;
  auto* serve = cli.add_subcommand("serve", "Serve the JSON API");
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--state-dir", state_dir, "Where run records persist");
  serve->add_option("--workers", workers)->check(CLI::PositiveNumber);

  app::GenerateLogOptions gen;
  auto* generate = cli.add_subcommand("generate-log", "Write one replication's logs as CSV");
  generate->add_option("--config", gen.config_path)->required()->check(CLI::ExistingFile);
  generate->add_option("--out", gen.site1_out, "Site-1 log path")->required();
  generate->add_option("--keyed-out", gen.keyed_out, "Keyed historical log path");
  generate->add_option("--rep", gen.rep, "Replication index");

  app::ResampleOptions rs;
  auto* resample = cli.add_subcommand("resample", "Replay a keyed log at a target overlap fraction");
  resample->add_option("--log", rs.keyed_log_path, "Keyed log CSV")->required()->check(CLI::ExistingFile);
  resample->add_option("--config", rs.config_path, "Config supplying the design")->required()->check(CLI::ExistingFile);
  resample->add_option("--p", rs.p_target, "Target overlap fraction")->required();
  resample->add_option("--seed", rs.seed);
  resample->add_option("--n", rs.n_out, "Output population size");
  resample->add_option("--out", rs.out_path, "Write the resampled site-1 log here");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kExitOk : app::kExitValidation;
  }

  try {
    if (*simulate) {
      app::cmd_simulate(config_path, out_dir, seed, std::cout);
    } else if (*estimate) {
      if (!bins_text.empty()) est.bins = app::parse_bins(bins_text);
      if (!bounds_text.empty()) est.bounds = app::parse_bounds(bounds_text);
      const auto result = app::cmd_estimate(est, std::cout);
      if (!json_out.empty()) {
        std::ofstream f(json_out);
        f << result.dump(2) << '\n';
        if (!f) throw std::runtime_error("cannot write " + json_out);
      }
    } else if (*serve) {
      return app::serve(host, port, state_dir, workers);
    } else if (*generate) {
      app::cmd_generate_log(gen, std::cout);
    } else if (*resample) {
      app::cmd_resample(rs, std::cout);
    }
  } catch (...) {
    return app::report_error(std::cerr);
  }
  return app::kExitOk;
}
