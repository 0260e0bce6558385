#pragma once

// Experiment configuration files (JSON). Keys mirror DesignConfig and
// SyntheticSpec field names:
//
//   {
//     "schema_version": 1,
//     "design":  { "alpha", "n_clusters", "cluster_salt", "treatment_labels",
//                  "site1_split", "test_mode" },
//     "spec":    { "mu": {"y10","y20","y13","y14","y23","y24"}, "delta1", "delta2",
//                  "noise_sd", "covariate_dim", "covariate_coeffs", "p_overlap",
//                  "n_users", "n_reps", "seed", "outcome_model" },
//     "sweep":   { "axis": "delta1"|"delta2"|"p_overlap"|"noise_sd", "values": [..] },
//     "methods": [ "uncorrected", "uncorrected+adj", "corrected", "corrected+adj" ]
//   }
//
// delta1/delta2 are optional and, when present, must agree with mu.

#include <string>
#include <vector>

#include <json.hpp>

#include "xsite/core_model.hpp"
#include "xsite/simulator.hpp"

namespace xsite::app {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
  DesignConfig design;
  SyntheticSpec spec;
  SweepGrid sweep;
  std::vector<Method> methods = default_methods();
};

/// Throws ValidationError whose field() is the JSON path of the problem.
DesignConfig design_from_json(const nlohmann::json& j, const std::string& path = "design");
nlohmann::json design_to_json(const DesignConfig& d);

ExperimentConfig config_from_json(const nlohmann::json& j);
/// Normalized form: every field present, deltas derived from mu.
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Parse errors are reported as ValidationError with field "<file>".
ExperimentConfig load_config(const std::string& path);

/// Content address: 32 hex digits over the normalized config (seed included).
std::string run_id_for(const ExperimentConfig& c);

}  // namespace xsite::app
