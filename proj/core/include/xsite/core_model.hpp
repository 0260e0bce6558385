#pragma once

// Domain types for a two-website experiment seen from website 1, and the
// rules that decide which potential outcome a user reveals.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xsite {

/// Treatment arms. Website 1 serves T1/T2, website 2 serves T3/T4. `None`
/// marks "did not visit website 2".
enum class Treatment : std::uint8_t { None = 0, T1 = 1, T2 = 2, T3 = 3, T4 = 4 };

enum class Cluster : std::uint8_t { C1 = 1, C2 = 2 };

enum class Site : std::uint8_t { One = 1, Two = 2 };

std::string_view to_string(Treatment t);
std::string_view to_string(Cluster c);

/// The (site 1, site 2) treatment pair a user experienced.
struct TreatmentExposure {
  Treatment site1 = Treatment::T1;
  Treatment site2 = Treatment::None;

  friend bool operator==(const TreatmentExposure&, const TreatmentExposure&) = default;
};

bool is_legal(TreatmentExposure e) noexcept;

/// Position of a legal exposure in the canonical order
/// (1,0) (2,0) (1,3) (1,4) (2,3) (2,4). Throws ValidationError otherwise.
std::size_t exposure_index(TreatmentExposure e);

inline constexpr std::array<TreatmentExposure, 6> kAllExposures{{
    {Treatment::T1, Treatment::None},
    {Treatment::T2, Treatment::None},
    {Treatment::T1, Treatment::T3},
    {Treatment::T1, Treatment::T4},
    {Treatment::T2, Treatment::T3},
    {Treatment::T2, Treatment::T4},
}};

/// One real value per legal exposure pair. Used both for a user's potential
/// outcomes and for the population means mu.
class ExposureValues {
 public:
  ExposureValues() = default;
  /// Values in canonical order: y10, y20, y13, y14, y23, y24.
  ExposureValues(double y10, double y20, double y13, double y14, double y23, double y24)
      : v_{y10, y20, y13, y14, y23, y24} {}
  explicit ExposureValues(const std::array<double, 6>& v) : v_(v) {}

  static ExposureValues constant(double c) { return ExposureValues(c, c, c, c, c, c); }

  double operator[](TreatmentExposure e) const { return v_[exposure_index(e)]; }
  double& operator[](TreatmentExposure e) { return v_[exposure_index(e)]; }

  double y10() const noexcept { return v_[0]; }
  double y20() const noexcept { return v_[1]; }
  double y13() const noexcept { return v_[2]; }
  double y14() const noexcept { return v_[3]; }
  double y23() const noexcept { return v_[4]; }
  double y24() const noexcept { return v_[5]; }

  const std::array<double, 6>& values() const noexcept { return v_; }
  bool all_finite() const noexcept;

  friend bool operator==(const ExposureValues&, const ExposureValues&) = default;

 private:
  std::array<double, 6> v_{};
};

/// The six potential outcomes of a single user. Always finite.
class PotentialOutcomeProfile {
 public:
  explicit PotentialOutcomeProfile(const ExposureValues& y);

  double operator[](TreatmentExposure e) const { return y_[e]; }
  const ExposureValues& values() const noexcept { return y_; }

 private:
  ExposureValues y_;
};

/// A simulated user. `user_key` never leaves the simulator.
struct UserRecord {
  std::string user_key;
  std::vector<double> x;
  bool visits_both = false;
};

inline constexpr double kEpsAlpha = 1e-6;

/// Throws ValidationError unless alpha is in [0, 1] and
/// |2 alpha - 1| >= 2 kEpsAlpha.
void require_identifiable_alpha(double alpha, std::string_view field = "alpha");

/// The aggregate agreement two brands exchange. Nothing user-level.
struct DesignConfig {
  double alpha = 0.75;
  int n_clusters = 2;
  std::uint64_t cluster_salt = 0;
  std::array<std::string, 4> treatment_labels{"T1", "T2", "T3", "T4"};
  double site1_split = 0.5;
  /// Allows degenerate allocation probabilities (alpha = 0 or 1, split 0 or 1).
  bool test_mode = false;

  /// Throws ValidationError naming the first offending field.
  void validate() const;
};

struct OutcomeBounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// Observed count/mean/variance for one (cluster, site-1 treatment) cell.
struct CellSummary {
  Cluster cluster = Cluster::C1;
  Treatment treatment = Treatment::T1;
  std::size_t n = 0;
  double mean = 0.0;
  double sample_variance = 0.0;
  std::optional<OutcomeBounds> outcome_bounds;

  void validate() const;
  /// Variance of the cell mean, sample_variance / n.
  double mean_variance() const { return sample_variance / static_cast<double>(n); }
  std::string label() const;
};

enum class Method : std::uint8_t {
  Naive,
  NaiveCovAdj,
  Corrected,
  CorrectedCovAdj,
  CATE,
  TrueOracle,
};

std::string_view to_string(Method m);
/// Accepts the labels produced by to_string. Throws ValidationError.
Method method_from_string(std::string_view s);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
};

struct EffectEstimate {
  Method method = Method::Corrected;
  double point = 0.0;
  double std_error = 0.0;
  std::optional<ConfidenceInterval> ci;
  std::size_t n_total = 0;
};

/// Two-sided normal interval point +- z * se.
ConfidenceInterval normal_interval(double point, double std_error, double level);

// Analytic oracles over the exposure means.

/// Expected observed outcome on site 1 for a group given `site1_treatment`
/// when website 2 serves its first arm with probability `alpha` to shared
/// users and a fraction `p` of users is shared.
double expected_observed_mean(const ExposureValues& mu, double p, double alpha,
                              Treatment site1_treatment);

/// Effect of a consistent T1-vs-T2 experience: (1-p)(y10-y20) + p(y13-y24).
double true_te(const ExposureValues& mu, double p);

double resolve_observed_outcome(const PotentialOutcomeProfile& profile,
                                TreatmentExposure exposure);

}  // namespace xsite
