#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "xsite/app/artifact.hpp"
#include "xsite/estimators.hpp"

namespace xsite::app {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitRuntime = 3 };

/// Maps an in-flight exception to the documented exit code and writes a
/// diagnostic to `err`.
int report_error(std::ostream& err);

/// Runs the sweep described by `config_path` and writes sweep.csv,
/// sweep.json and manifest.json into `out_dir`.
RunArtifact cmd_simulate(const std::string& config_path, const std::string& out_dir,
                         std::optional<std::uint64_t> seed, std::ostream& out);

struct EstimateOptions {
  std::string log_path;
  double alpha = 0.75;
  std::optional<CovariateBinning> bins;
  std::optional<OutcomeBounds> bounds;
  bool binary = false;
  double level = kDefaultLevel;
};

/// "x2:0,1.5" or "2:0,1.5" -> column 1 cut at 0 and 1.5.
CovariateBinning parse_bins(const std::string& text);
/// "lo,hi"
OutcomeBounds parse_bounds(const std::string& text);

/// Every applicable estimator over a site-1 log, as JSON.
nlohmann::json cmd_estimate(const EstimateOptions& options, std::ostream& out);

struct GenerateLogOptions {
  std::string config_path;
  std::string site1_out;
  std::string keyed_out;
  std::uint64_t rep = 0;
};

/// Writes the site-1 log (and optionally the keyed historical log) of one
/// replication of the config's base spec.
void cmd_generate_log(const GenerateLogOptions& options, std::ostream& out);

struct ResampleOptions {
  std::string keyed_log_path;
  std::string config_path;
  double p_target = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> n_out;
  std::string out_path;
};

nlohmann::json cmd_resample(const ResampleOptions& options, std::ostream& out);

}  // namespace xsite::app
