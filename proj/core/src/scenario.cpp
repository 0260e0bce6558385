#include "xsite/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "xsite/errors.hpp"
#include "xsite/randomization.hpp"
#include "xsite/rng.hpp"

namespace xsite {

std::vector<LogRecord> generate_keyed_log(const SyntheticSpec& spec, std::uint64_t rep_index) {
  const Population pop = generate_population(spec, rep_index);
  const std::uint64_t seed = replication_seed(spec.seed, rep_index);
  std::vector<LogRecord> records;
  records.reserve(pop.users.size() * 2);
  for (std::size_t i = 0; i < pop.users.size(); ++i) {
    const UserRecord& u = pop.users[i];
    CounterStream s = make_stream(seed, StreamTag::Historical, i);
    TreatmentExposure e{s.bernoulli(0.5) ? Treatment::T1 : Treatment::T2, Treatment::None};
    if (u.visits_both) e.site2 = s.bernoulli(0.5) ? Treatment::T3 : Treatment::T4;
    const double y = pop.profiles[i][e];
    records.push_back({u.user_key, 1, std::nullopt, e.site1, y, u.x});
    if (u.visits_both) records.push_back({u.user_key, 2, std::nullopt, e.site2, y, u.x});
  }
  return records;
}

namespace {

struct Visitor {
  std::string key;
  std::size_t period1 = 0;
  std::optional<std::size_t> period2;
};

std::string exposure_label(TreatmentExposure e) {
  return "(" + std::string(to_string(e.site1)) + "," + std::string(to_string(e.site2)) + ")";
}

/// First `k` entries of a seeded Fisher-Yates shuffle of `items`.
// Largest n whose split round(p n) / n - round(p n) fits the available users.
std::size_t largest_population(double p, std::size_t n_shared, std::size_t n_single) {
  double cap = static_cast<double>(n_shared + n_single);
  if (p > 0.0) cap = std::min(cap, (static_cast<double>(n_shared) + 0.5) / p);
  if (p < 1.0) cap = std::min(cap, (static_cast<double>(n_single) + 0.5) / (1.0 - p));
  auto n = static_cast<std::size_t>(cap);
  while (n > 0) {
    const auto k = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
    if (k <= n_shared && n - k <= n_single) break;
    --n;
  }
  return n;
}

std::vector<std::size_t> choose(std::vector<std::size_t> items, std::size_t k, CounterStream& s) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(s.below(items.size() - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  std::sort(items.begin(), items.end());
  return items;
}

}  // namespace

ScenarioResult resample_scenario(const std::vector<LogRecord>& records, double p_target,
                                 const DesignConfig& config, std::uint64_t seed,
                                 const ScenarioOptions& options) {
  if (!(p_target >= 0.0 && p_target <= 1.0)) throw ValidationError("p_target", "must lie in [0, 1]");
  const AllocationTable table = AllocationTable::from_design(config);

  // Group visits by user key, keeping each user's first record per period.
  std::vector<Visitor> visitors;
  std::map<std::string, std::size_t> by_key;
  const std::size_t dim = records.empty() ? 0 : records.front().x.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LogRecord& r = records[i];
    if (!r.user_key || r.user_key->empty()) {
      throw ValidationError("records[" + std::to_string(i) + "].user_key", "resampling needs keyed records");
    }
    if (r.x.size() != dim) throw ValidationError("records[" + std::to_string(i) + "].x", "covariate dimension mismatch");
    if (r.period == 1) {
      if (by_key.contains(*r.user_key)) continue;
      by_key.emplace(*r.user_key, visitors.size());
      visitors.push_back({*r.user_key, i, std::nullopt});
    }
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LogRecord& r = records[i];
    if (r.period != 2) continue;
    const auto it = by_key.find(*r.user_key);
    if (it != by_key.end() && !visitors[it->second].period2) visitors[it->second].period2 = i;
  }

  // Empirical outcome pools per exposure, and the shared / single split.
  std::array<std::vector<std::size_t>, 6> pools;
  std::vector<std::size_t> shared;
  std::vector<std::size_t> single;
  for (std::size_t v = 0; v < visitors.size(); ++v) {
    const Visitor& vis = visitors[v];
    TreatmentExposure e{records[vis.period1].treatment, Treatment::None};
    if (vis.period2) {
      e.site2 = records[*vis.period2].treatment;
      shared.push_back(v);
    } else {
      single.push_back(v);
    }
    pools[exposure_index(e)].push_back(vis.period1);
  }

  const std::size_t n_out = options.n_out.value_or(largest_population(p_target, shared.size(), single.size()));
  if (n_out == 0) throw ValidationError("n_out", "nothing to resample: no usable visitors at this p_target");
  ScenarioResult result;
  result.attainable_max = std::min(1.0, static_cast<double>(shared.size()) / static_cast<double>(n_out));
  const double attainable_min =
      std::max(0.0, 1.0 - static_cast<double>(single.size()) / static_cast<double>(n_out));
  const auto k = static_cast<std::size_t>(std::llround(p_target * static_cast<double>(n_out)));
  if (k > shared.size() || n_out - k > single.size()) {
    std::ostringstream msg;
    msg << "p_target " << p_target << " with " << n_out << " users needs " << k << " shared and "
        << (n_out - k) << " single-site users but the log has " << shared.size() << " and "
        << single.size() << "; attainable range is [" << attainable_min << ", "
        << result.attainable_max << "]";
    throw ScenarioError(msg.str(), result.attainable_max);
  }

  for (std::size_t e = 0; e < 6; ++e) {
    const auto& pool = pools[e];
    double sum = 0.0;
    for (std::size_t idx : pool) sum += records[idx].outcome;
    std::array<double, 6> m = result.pool_means.values();
    m[e] = pool.empty() ? std::nan("") : sum / static_cast<double>(pool.size());
    result.pool_means = ExposureValues(m);
  }

  CounterStream pick = make_stream(seed, StreamTag::Resample, 0);
  std::vector<std::pair<std::size_t, bool>> chosen;
  for (std::size_t v : choose(shared, k, pick)) chosen.emplace_back(v, true);
  for (std::size_t v : choose(single, n_out - k, pick)) chosen.emplace_back(v, false);
  std::sort(chosen.begin(), chosen.end());

  result.log = Site1Log(dim);
  result.log.reserve(n_out);
  result.exposures.reserve(n_out);
  for (std::size_t row = 0; row < chosen.size(); ++row) {
    const auto [v, is_shared] = chosen[row];
    const Cluster cluster = assign_macrocluster(visitors[v].key, config.cluster_salt);
    CounterStream s1 = make_stream(seed, StreamTag::Site1, row);
    TreatmentExposure e{allocate_treatment(cluster, Site::One, table, s1), Treatment::None};
    if (is_shared) {
      CounterStream s2 = make_stream(seed, StreamTag::Site2, row);
      e.site2 = allocate_treatment(cluster, Site::Two, table, s2);
    }
    const auto& pool = pools[exposure_index(e)];
    if (pool.empty()) {
      throw ScenarioError("no historical outcomes for exposure " + exposure_label(e), result.attainable_max);
    }
    CounterStream draw = make_stream(seed, StreamTag::Resample, row + 1);
    const LogRecord& src = records[pool[draw.below(pool.size())]];
    result.log.push_back(cluster, e.site1, src.outcome, src.x);
    result.exposures.push_back(e);
  }
  result.n_shared = k;
  result.n_single = n_out - k;
  result.realized_shared_fraction = static_cast<double>(k) / static_cast<double>(n_out);
  const double q = result.realized_shared_fraction;
  const ExposureValues& m = result.pool_means;
  const double single_part = (q < 1.0) ? (1.0 - q) * (m.y10() - m.y20()) : 0.0;
  const double shared_part = (q > 0.0) ? q * (m.y13() - m.y24()) : 0.0;
  result.true_te = single_part + shared_part;
  return result;
}

}  // namespace xsite
