#include "xsite/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xsite/errors.hpp"
#include "xsite/randomization.hpp"
#include "xsite/rng.hpp"

namespace xsite {

std::string_view to_string(OutcomeModel m) {
  return m == OutcomeModel::Gaussian ? "gaussian" : "bernoulli";
}

void SyntheticSpec::set_delta1(double d) {
  mu[{Treatment::T1, Treatment::T4}] = mu.y13() + d;
}

void SyntheticSpec::set_delta2(double d) {
  mu[{Treatment::T2, Treatment::T4}] = mu.y23() + d;
}

void SyntheticSpec::validate() const {
  if (!mu.all_finite()) throw ValidationError("spec.mu", "all six means must be finite");
  if (!std::isfinite(noise_sd) || noise_sd < 0.0) throw ValidationError("spec.noise_sd", "must be finite and >= 0");
  for (std::size_t j = 0; j < covariate_coeffs.size(); ++j) {
    if (!std::isfinite(covariate_coeffs[j])) {
      throw ValidationError("spec.covariate_coeffs[" + std::to_string(j) + "]", "must be finite");
    }
  }
  if (!(p_overlap >= 0.0 && p_overlap <= 1.0)) throw ValidationError("spec.p_overlap", "must lie in [0, 1]");
  if (n_users < 4) throw ValidationError("spec.n_users", "need at least 4 users to fill four cells");
  if (n_reps < 1) throw ValidationError("spec.n_reps", "must be >= 1");
  if (outcome_model == OutcomeModel::Bernoulli) {
    for (double m : mu.values()) {
      if (m < 0.0 || m > 1.0) throw ValidationError("spec.mu", "Bernoulli means must lie in [0, 1]");
    }
  }
}

std::optional<OutcomeBounds> natural_bounds(const SyntheticSpec& spec) {
  if (spec.outcome_model == OutcomeModel::Bernoulli) return OutcomeBounds{0.0, 1.0};
  return std::nullopt;
}

Population generate_population(const SyntheticSpec& spec, std::uint64_t rep_index) {
  spec.validate();
  const std::uint64_t seed = replication_seed(spec.seed, rep_index);
  const std::size_t d = spec.covariate_dim();
  Population pop;
  pop.users.reserve(spec.n_users);
  pop.profiles.reserve(spec.n_users);
  const std::string prefix = "u" + std::to_string(rep_index) + ":";

  for (std::size_t i = 0; i < spec.n_users; ++i) {
    CounterStream s = make_stream(seed, StreamTag::Population, i);
    UserRecord user;
    user.user_key = prefix + std::to_string(i);
    user.x.resize(d);
    double shift = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      user.x[j] = s.normal();
      shift += user.x[j] * spec.covariate_coeffs[j];
    }
    user.visits_both = s.bernoulli(spec.p_overlap);

    std::array<double, 6> y{};
    for (std::size_t k = 0; k < 6; ++k) {
      const double base = spec.mu.values()[k] + shift;
      if (spec.outcome_model == OutcomeModel::Gaussian) {
        y[k] = base + spec.noise_sd * s.normal();
      } else {
        y[k] = s.bernoulli(std::clamp(base, 0.0, 1.0)) ? 1.0 : 0.0;
      }
    }
    pop.users.push_back(std::move(user));
    pop.profiles.emplace_back(ExposureValues(y));
  }
  return pop;
}

Replication run_replication(const SyntheticSpec& spec, const DesignConfig& config,
                            std::uint64_t rep_index, std::vector<TreatmentExposure>* trace) {
  const Population pop = generate_population(spec, rep_index);
  Site1Log log = expose_population(pop.users, pop.profiles, config,
                                   replication_seed(spec.seed, rep_index), trace);
  CellQuartet quartet = summarize_cells(log, natural_bounds(spec));
  return {std::move(quartet), std::move(log)};
}

EffectEstimate apply_method(Method method, const Replication& rep, double alpha) {
  switch (method) {
    case Method::Naive: return naive_ate(rep.quartet);
    case Method::NaiveCovAdj: return naive_adjusted_ate(rep.log);
    case Method::Corrected: return corrected_te(rep.quartet, alpha);
    case Method::CorrectedCovAdj: return covariate_adjusted_ate(rep.log, alpha);
    case Method::CATE:
    case Method::TrueOracle: break;
  }
  throw ValidationError("methods", "method '" + std::string(to_string(method)) +
                                       "' is not a replication estimator");
}

double ReplicationSummary::mc_error() const {
  return n_reps > 0 ? std_error_of_estimate / std::sqrt(static_cast<double>(n_reps)) : 0.0;
}

ReplicationSummary summarize_replications(Method method, const std::vector<double>& estimates,
                                          double truth) {
  ReplicationSummary s;
  s.method = method;
  s.true_te = truth;
  s.n_reps = estimates.size();
  if (estimates.empty()) {
    s.mean_estimate = s.bias = s.std_error_of_estimate = std::nan("");
    return s;
  }
  const double n = static_cast<double>(estimates.size());
  s.mean_estimate = std::accumulate(estimates.begin(), estimates.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : estimates) ss += (e - s.mean_estimate) * (e - s.mean_estimate);
  s.std_error_of_estimate = estimates.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.bias = s.mean_estimate - truth;
  return s;
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Delta1: return "delta1";
    case SweepAxis::Delta2: return "delta2";
    case SweepAxis::POverlap: return "p_overlap";
    case SweepAxis::NoiseSd: return "noise_sd";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(std::string_view s) {
  for (SweepAxis a : {SweepAxis::Delta1, SweepAxis::Delta2, SweepAxis::POverlap, SweepAxis::NoiseSd}) {
    if (to_string(a) == s) return a;
  }
  throw ValidationError("sweep.axis", "unknown axis '" + std::string(s) +
                                          "' (expected delta1, delta2, p_overlap or noise_sd)");
}

SyntheticSpec apply_axis(SyntheticSpec spec, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::Delta1: spec.set_delta1(value); break;
    case SweepAxis::Delta2: spec.set_delta2(value); break;
    case SweepAxis::POverlap: spec.p_overlap = value; break;
    case SweepAxis::NoiseSd: spec.noise_sd = value; break;
  }
  return spec;
}

std::vector<Method> default_methods() {
  return {Method::Naive, Method::NaiveCovAdj, Method::Corrected, Method::CorrectedCovAdj};
}

std::size_t default_thread_count() {
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct RepOutcome {
  std::vector<std::optional<double>> estimates;
  std::vector<std::string> errors;
};

}  // namespace

SweepResult sweep(const SweepGrid& grid, const SyntheticSpec& spec, const DesignConfig& config,
                  const std::vector<Method>& methods, std::size_t threads) {
  if (grid.values.empty()) throw ValidationError("sweep.values", "grid must be non-empty");
  if (methods.empty()) throw ValidationError("methods", "at least one method is required");
  config.validate();
  for (Method m : methods) {
    if (m == Method::CATE || m == Method::TrueOracle) {
      throw ValidationError("methods", "method '" + std::string(to_string(m)) +
                                           "' is not a replication estimator");
    }
  }

  SweepResult result;
  for (double value : grid.values) {
    SweepPoint point;
    point.axis = grid.axis;
    point.value = value;
    const SyntheticSpec pt = apply_axis(spec, grid.axis, value);
    try {
      pt.validate();
    } catch (const ValidationError& e) {
      point.failures.emplace_back(e.what());
      result.points.push_back(std::move(point));
      continue;
    }
    point.true_te = pt.true_effect();

    const auto reps = parallel_map<RepOutcome>(pt.n_reps, threads, [&](std::size_t r) {
      RepOutcome out;
      out.estimates.resize(methods.size());
      try {
        const Replication rep = run_replication(pt, config, r);
        for (std::size_t m = 0; m < methods.size(); ++m) {
          try {
            out.estimates[m] = apply_method(methods[m], rep, config.alpha).point;
          } catch (const Error& e) {
            out.errors.push_back("rep " + std::to_string(r) + " " +
                                 std::string(to_string(methods[m])) + ": " + e.what());
          }
        }
      } catch (const Error& e) {
        out.errors.push_back("rep " + std::to_string(r) + ": " + e.what());
      }
      return out;
    });

    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::vector<double> values;
      values.reserve(reps.size());
      for (const RepOutcome& r : reps) {
        if (r.estimates[m]) values.push_back(*r.estimates[m]);
      }
      point.summaries.push_back(summarize_replications(methods[m], values, point.true_te));
    }
    for (const RepOutcome& r : reps) {
      point.failures.insert(point.failures.end(), r.errors.begin(), r.errors.end());
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

}  // namespace xsite
