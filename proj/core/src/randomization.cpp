#include "xsite/randomization.hpp"

#include <cmath>
#include <string>

#include "xsite/errors.hpp"

namespace xsite {

std::uint64_t cluster_hash(std::string_view key, std::uint64_t salt) noexcept {
  constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  std::uint64_t h = kOffset;
  for (int i = 0; i < 8; ++i) {
    h ^= (salt >> (8 * i)) & 0xffU;
    h *= kPrime;
  }
  for (unsigned char c : key) {
    h ^= c;
    h *= kPrime;
  }
  return fmix64(h);
}

Cluster assign_macrocluster(std::string_view cluster_key, std::uint64_t salt) {
  if (cluster_key.empty()) throw ValidationError("cluster_key", "cluster key must be non-empty");
  return (cluster_hash(cluster_key, salt) & 1U) ? Cluster::C2 : Cluster::C1;
}

namespace {

std::size_t slot(Site site, Cluster cluster) {
  return (site == Site::One ? 0 : 2) + (cluster == Cluster::C1 ? 0 : 1);
}

}  // namespace

AllocationTable::AllocationTable(double site1_c1, double site1_c2, double site2_c1,
                                 double site2_c2, bool allow_degenerate)
    : prob_{site1_c1, site1_c2, site2_c1, site2_c2}, allow_degenerate_(allow_degenerate) {
  static constexpr const char* kNames[] = {"site1.C1", "site1.C2", "site2.C1", "site2.C2"};
  for (std::size_t i = 0; i < prob_.size(); ++i) {
    const double p = prob_[i];
    const bool ok = allow_degenerate ? (p >= 0.0 && p <= 1.0) : (p > 0.0 && p < 1.0);
    if (!std::isfinite(p) || !ok) {
      throw ValidationError(std::string("allocation.") + kNames[i],
                            allow_degenerate ? "probability must lie in [0, 1]"
                                             : "probability must lie in (0, 1) (positivity)");
    }
  }
}

AllocationTable AllocationTable::from_design(const DesignConfig& config) {
  config.validate();
  return AllocationTable(config.site1_split, config.site1_split, config.alpha, 1.0 - config.alpha,
                         config.test_mode);
}

double AllocationTable::first_arm_probability(Site site, Cluster cluster) const noexcept {
  return prob_[slot(site, cluster)];
}

Treatment allocate_treatment(Cluster cluster, Site site, const AllocationTable& table,
                             CounterStream& stream) {
  const bool first = stream.bernoulli(table.first_arm_probability(site, cluster));
  if (site == Site::One) return first ? Treatment::T1 : Treatment::T2;
  return first ? Treatment::T3 : Treatment::T4;
}

Site1Log expose_population(std::span<const UserRecord> users,
                           std::span<const PotentialOutcomeProfile> profiles,
                           const DesignConfig& config, std::uint64_t seed,
                           std::vector<TreatmentExposure>* trace) {
  if (users.size() != profiles.size()) {
    throw ValidationError("profiles", "users and profiles must be aligned");
  }
  const AllocationTable table = AllocationTable::from_design(config);
  const std::size_t dim = users.empty() ? 0 : users.front().x.size();

  Site1Log log(dim);
  log.reserve(users.size());
  if (trace) {
    trace->clear();
    trace->reserve(users.size());
  }
  for (std::size_t i = 0; i < users.size(); ++i) {
    const UserRecord& user = users[i];
    if (user.x.size() != dim) {
      throw ValidationError("users[" + std::to_string(i) + "].x", "covariate dimension differs across users");
    }
    const Cluster cluster = assign_macrocluster(user.user_key, config.cluster_salt);
    CounterStream s1 = make_stream(seed, StreamTag::Site1, i);
    TreatmentExposure exposure{allocate_treatment(cluster, Site::One, table, s1), Treatment::None};
    if (user.visits_both) {
      CounterStream s2 = make_stream(seed, StreamTag::Site2, i);
      exposure.site2 = allocate_treatment(cluster, Site::Two, table, s2);
    }
    log.push_back(cluster, exposure.site1, resolve_observed_outcome(profiles[i], exposure), user.x);
    if (trace) trace->push_back(exposure);
  }
  return log;
}

}  // namespace xsite
