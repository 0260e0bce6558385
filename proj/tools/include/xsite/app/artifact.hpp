#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "xsite/app/config_io.hpp"
#include "xsite/simulator.hpp"

namespace xsite::app {

/// A completed sweep and the exact configuration that produced it.
struct RunArtifact {
  std::string run_id;
  ExperimentConfig config;
  SweepResult result;
  std::string created_at;
};

/// Runs the configured sweep. `threads` = 0 picks the hardware default.
RunArtifact execute_run(const ExperimentConfig& config, std::size_t threads = 0);

nlohmann::json summary_to_json(const ReplicationSummary& s);
nlohmann::json sweep_to_json(const SweepResult& r);
SweepResult sweep_from_json(const nlohmann::json& j);

/// Manifest form, schema-versioned.
nlohmann::json artifact_to_json(const RunArtifact& a);
/// Throws ValidationError on a missing or unsupported schema_version.
RunArtifact artifact_from_json(const nlohmann::json& j);

/// Flat table: axis,value,method,true_te,mean_estimate,bias,se,mc_error,n_reps
void write_sweep_csv(std::ostream& out, const SweepResult& r);
/// Rows of the flat table as JSON objects.
nlohmann::json sweep_rows_json(const RunArtifact& a);

/// Human-readable table.
void print_summary(std::ostream& out, const RunArtifact& a);

std::string utc_timestamp();

}  // namespace xsite::app
