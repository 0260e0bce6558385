#pragma once

// Log-replay scenarios. Historical logs from two time periods stand in for
// two websites: a visitor seen in both periods is a shared user, a visitor
// seen only in period 1 visited website 1 alone. Outcomes observed under each
// (period-1 treatment, period-2 treatment) pair form empirical outcome pools;
// a resampled population is then pushed through the two-stage design and
// each visit's outcome is drawn from the pool of its realized exposure.

#include <cstdint>
#include <optional>
#include <vector>

#include "xsite/core_model.hpp"
#include "xsite/log_io.hpp"
#include "xsite/simulator.hpp"

namespace xsite {

/// Synthetic historical log with user keys: one period-1 record per user with
/// a uniformly served T1/T2 and, for shared users, a period-2 record with a
/// uniformly served T3/T4. Period-1 outcomes are the profile entries for the
/// served exposure.
std::vector<LogRecord> generate_keyed_log(const SyntheticSpec& spec, std::uint64_t rep_index);

struct ScenarioResult {
  Site1Log log;
  std::size_t n_shared = 0;
  std::size_t n_single = 0;
  double realized_shared_fraction = 0.0;
  /// Largest fraction the input supports at this output size.
  double attainable_max = 0.0;
  /// Pool means for each exposure.
  ExposureValues pool_means;
  /// (1-q)(m10-m20) + q(m13-m24) at the realized fraction q.
  double true_te = 0.0;
  /// Realized exposure per emitted row; in-process only.
  std::vector<TreatmentExposure> exposures;
};

struct ScenarioOptions {
  /// Number of site-1 visitors to emit; defaults to the largest population
  /// the log supports at the target overlap.
  std::optional<std::size_t> n_out;
};

/// Throws ScenarioError (carrying the attainable maximum) when `p_target`
/// needs more shared or single users than the log holds, or when an exposure
/// the design can produce has an empty outcome pool.
ScenarioResult resample_scenario(const std::vector<LogRecord>& records, double p_target,
                                 const DesignConfig& config, std::uint64_t seed,
                                 const ScenarioOptions& options = {});

}  // namespace xsite
