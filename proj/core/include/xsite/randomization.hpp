#pragma once

// Two-stage design: a shared, deterministic macrocluster mapping followed by
// independent per-site, per-cluster treatment allocation.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "xsite/core_model.hpp"
#include "xsite/rng.hpp"
#include "xsite/site1_log.hpp"

namespace xsite {

/// Stable 64-bit hash of salt||key. Both websites must compute the same
/// value for the same input, so the definition is fixed:
///
///   bytes = salt as 8 little-endian bytes, followed by the key bytes
///   h     = FNV-1a-64(bytes)   (offset 0xcbf29ce484222325, prime 0x100000001b3)
///   h     = fmix64(h)          (murmur3 finalizer)
///
/// Test vectors live in tests/randomization_test.cpp.
std::uint64_t cluster_hash(std::string_view key, std::uint64_t salt) noexcept;

/// murmur3 `fmix64`.
constexpr std::uint64_t fmix64(std::uint64_t h) noexcept {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

/// Low bit 0 -> C1, 1 -> C2. Throws ValidationError on an empty key.
Cluster assign_macrocluster(std::string_view cluster_key, std::uint64_t salt);

/// Probability of each site's first arm (T1 on site 1, T3 on site 2) per
/// cluster. Site 2 uses (alpha, 1 - alpha) for (C1, C2); site 1 uses its split
/// in both clusters.
class AllocationTable {
 public:
  /// Throws ValidationError if a probability lies outside (0, 1), or outside
  /// [0, 1] when `allow_degenerate` is set.
  AllocationTable(double site1_c1, double site1_c2, double site2_c1, double site2_c2,
                  bool allow_degenerate = false);

  static AllocationTable from_design(const DesignConfig& config);

  double first_arm_probability(Site site, Cluster cluster) const noexcept;
  bool allows_degenerate() const noexcept { return allow_degenerate_; }

 private:
  std::array<double, 4> prob_;
  bool allow_degenerate_;
};

/// Draws one treatment for `site` in `cluster`: T1/T2 on site 1, T3/T4 on
/// site 2.
Treatment allocate_treatment(Cluster cluster, Site site, const AllocationTable& table,
                             CounterStream& stream);

/// Runs the design over a population and returns website 1's log. Cluster
/// keys are the users' `user_key`. Draws for user i come from streams keyed
/// by (seed, i, site), so output does not depend on evaluation order.
///
/// If `trace` is non-null it receives each user's realized exposure; the
/// trace is for in-process checks and is never part of the log.
Site1Log expose_population(std::span<const UserRecord> users,
                           std::span<const PotentialOutcomeProfile> profiles,
                           const DesignConfig& config, std::uint64_t seed,
                           std::vector<TreatmentExposure>* trace = nullptr);

}  // namespace xsite
