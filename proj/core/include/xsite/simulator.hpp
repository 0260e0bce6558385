#pragma once

// Synthetic experiments: draw a population with known potential-outcome
// means, run the design over it, and measure each estimator's bias and
// replication spread against the analytic effect.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "xsite/core_model.hpp"
#include "xsite/estimators.hpp"
#include "xsite/site1_log.hpp"

namespace xsite {

enum class OutcomeModel : std::uint8_t {
  /// y = mu + x . coeffs + N(0, noise_sd^2), independently per exposure.
  Gaussian,
  /// y ~ Bernoulli(clamp(mu + x . coeffs, 0, 1)).
  Bernoulli,
};

std::string_view to_string(OutcomeModel m);

struct SyntheticSpec {
  ExposureValues mu;
  double noise_sd = 1.0;
  std::vector<double> covariate_coeffs;
  double p_overlap = 0.5;
  std::size_t n_users = 10000;
  std::size_t n_reps = 20;
  std::uint64_t seed = 0;
  OutcomeModel outcome_model = OutcomeModel::Gaussian;

  std::size_t covariate_dim() const noexcept { return covariate_coeffs.size(); }
  /// mu(1,4) - mu(1,3)
  double delta1() const noexcept { return mu.y14() - mu.y13(); }
  /// mu(2,4) - mu(2,3)
  double delta2() const noexcept { return mu.y24() - mu.y23(); }

  /// Moves mu(1,4) so that delta1() == d.
  void set_delta1(double d);
  /// Moves mu(2,4) so that delta2() == d.
  void set_delta2(double d);

  double true_effect() const { return true_te(mu, p_overlap); }

  void validate() const;
};

/// Outcome range implied by the model: (0, 1) for Bernoulli, none otherwise.
std::optional<OutcomeBounds> natural_bounds(const SyntheticSpec& spec);

struct Population {
  std::vector<UserRecord> users;
  std::vector<PotentialOutcomeProfile> profiles;
};

Population generate_population(const SyntheticSpec& spec, std::uint64_t rep_index);

struct Replication {
  CellQuartet quartet;
  Site1Log log;
};

/// generate -> expose -> summarize. Throws EmptyCellError if a cell ends
/// empty. `trace` receives the per-user exposures when non-null.
Replication run_replication(const SyntheticSpec& spec, const DesignConfig& config,
                            std::uint64_t rep_index,
                            std::vector<TreatmentExposure>* trace = nullptr);

/// Applies one estimator to a replication.
EffectEstimate apply_method(Method method, const Replication& rep, double alpha);

struct ReplicationSummary {
  Method method = Method::Corrected;
  double mean_estimate = 0.0;
  double true_te = 0.0;
  /// mean_estimate - true_te
  double bias = 0.0;
  /// Standard deviation of the estimate across replications.
  double std_error_of_estimate = 0.0;
  std::size_t n_reps = 0;
  /// Standard error of the Monte Carlo mean, sd / sqrt(n_reps).
  double mc_error() const;
};

ReplicationSummary summarize_replications(Method method, const std::vector<double>& estimates,
                                          double truth);

enum class SweepAxis : std::uint8_t { Delta1, Delta2, POverlap, NoiseSd };

std::string_view to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(std::string_view s);

struct SweepGrid {
  SweepAxis axis = SweepAxis::Delta1;
  std::vector<double> values;
};

/// `spec` with the axis set to `value`.
SyntheticSpec apply_axis(SyntheticSpec spec, SweepAxis axis, double value);

struct SweepPoint {
  SweepAxis axis = SweepAxis::Delta1;
  double value = 0.0;
  double true_te = 0.0;
  std::vector<ReplicationSummary> summaries;
  /// One message per failed replication or estimator.
  std::vector<std::string> failures;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// The four methods compared on synthetic data.
std::vector<Method> default_methods();

std::size_t default_thread_count();

/// Runs `n_reps` replications of every grid point. A failed replication is
/// recorded in the point's `failures` and excluded from its summaries.
/// Results are identical for any thread count.
SweepResult sweep(const SweepGrid& grid, const SyntheticSpec& spec, const DesignConfig& config,
                  const std::vector<Method>& methods, std::size_t threads = default_thread_count());

/// Evaluates fn(0..n-1) on `threads` workers; results are stored by index.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t threads,
                            const std::function<T(std::size_t)>& fn);

}  // namespace xsite

#include "xsite/detail/parallel_map.hpp"
