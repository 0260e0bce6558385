#include "xsite/core_model.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "xsite/errors.hpp"

namespace xsite {

std::string_view to_string(Treatment t) {
  switch (t) {
    case Treatment::None: return "None";
    case Treatment::T1: return "T1";
    case Treatment::T2: return "T2";
    case Treatment::T3: return "T3";
    case Treatment::T4: return "T4";
  }
  return "?";
}

std::string_view to_string(Cluster c) {
  switch (c) {
    case Cluster::C1: return "C1";
    case Cluster::C2: return "C2";
  }
  return "?";
}

bool is_legal(TreatmentExposure e) noexcept {
  const bool s1 = e.site1 == Treatment::T1 || e.site1 == Treatment::T2;
  const bool s2 = e.site2 == Treatment::None || e.site2 == Treatment::T3 ||
                  e.site2 == Treatment::T4;
  return s1 && s2;
}

std::size_t exposure_index(TreatmentExposure e) {
  if (!is_legal(e)) {
    throw ValidationError("exposure", "illegal exposure pair (" + std::string(to_string(e.site1)) +
                                          ", " + std::string(to_string(e.site2)) + ")");
  }
  const std::size_t row = e.site1 == Treatment::T1 ? 0 : 1;
  switch (e.site2) {
    case Treatment::None: return row;
    case Treatment::T3: return 2 + 2 * row;
    default: return 3 + 2 * row;
  }
}

bool ExposureValues::all_finite() const noexcept {
  return std::all_of(v_.begin(), v_.end(), [](double v) { return std::isfinite(v); });
}

PotentialOutcomeProfile::PotentialOutcomeProfile(const ExposureValues& y) : y_(y) {
  if (!y.all_finite()) throw ValidationError("profile", "potential outcomes must be finite");
}

void require_identifiable_alpha(double alpha, std::string_view field) {
  const std::string f(field);
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) {
    throw ValidationError(f, "alpha must lie in [0, 1]");
  }
  if (std::abs(2.0 * alpha - 1.0) < 2.0 * kEpsAlpha) {
    throw ValidationError(f, "alpha too close to 0.5: |2*alpha - 1| must be >= 2*eps_alpha (eps_alpha = 1e-6)");
  }
}

void DesignConfig::validate() const {
  require_identifiable_alpha(alpha, "alpha");
  if (!test_mode && (alpha <= 0.0 || alpha >= 1.0)) {
    throw ValidationError("alpha", "alpha must lie strictly inside (0, 1) outside test mode (positivity)");
  }
  if (n_clusters != 2) throw ValidationError("n_clusters", "only 2 macroclusters are supported");
  if (!std::isfinite(site1_split) || site1_split < 0.0 || site1_split > 1.0) {
    throw ValidationError("site1_split", "site1_split must lie in [0, 1]");
  }
  if (!test_mode && (site1_split <= 0.0 || site1_split >= 1.0)) {
    throw ValidationError("site1_split", "site1_split must lie strictly inside (0, 1) outside test mode (positivity)");
  }
  for (std::size_t i = 0; i < treatment_labels.size(); ++i) {
    if (treatment_labels[i].empty()) {
      throw ValidationError("treatment_labels[" + std::to_string(i) + "]", "label must be non-empty");
    }
  }
}

void CellSummary::validate() const {
  if (treatment != Treatment::T1 && treatment != Treatment::T2) {
    throw ValidationError("cell.treatment", "site-1 cell treatment must be T1 or T2");
  }
  if (n < 1) throw EmptyCellError(label());
  if (!std::isfinite(mean) || !std::isfinite(sample_variance) || sample_variance < 0.0) {
    throw ValidationError("cell." + label(), "mean and variance must be finite, variance >= 0");
  }
  if (outcome_bounds) {
    const auto& b = *outcome_bounds;
    if (!(b.lo <= b.hi) || b.lo > mean + 1e-12 || mean > b.hi + 1e-12) {
      throw ValidationError("cell." + label() + ".outcome_bounds", "bounds must satisfy lo <= mean <= hi");
    }
  }
}

std::string CellSummary::label() const {
  return "(" + std::string(to_string(cluster)) + "," + std::string(to_string(treatment)) + ")";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Naive: return "uncorrected";
    case Method::NaiveCovAdj: return "uncorrected+adj";
    case Method::Corrected: return "corrected";
    case Method::CorrectedCovAdj: return "corrected+adj";
    case Method::CATE: return "cate";
    case Method::TrueOracle: return "true";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::Naive, Method::NaiveCovAdj, Method::Corrected, Method::CorrectedCovAdj,
                   Method::CATE, Method::TrueOracle}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("method", "unknown method '" + std::string(s) + "'");
}

ConfidenceInterval normal_interval(double point, double std_error, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level", "confidence level must lie in (0, 1)");
  const boost::math::normal standard;
  const double z = boost::math::quantile(standard, 0.5 + level / 2.0);
  return {point - z * std_error, point + z * std_error, level};
}

double expected_observed_mean(const ExposureValues& mu, double p, double alpha,
                              Treatment site1_treatment) {
  if (!mu.all_finite()) throw ValidationError("mu", "means must be finite");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p", "p must lie in [0, 1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha", "alpha must lie in [0, 1]");
  if (site1_treatment != Treatment::T1 && site1_treatment != Treatment::T2) {
    throw ValidationError("site1_treatment", "must be T1 or T2");
  }
  const Treatment t = site1_treatment;
  return (1.0 - p) * mu[{t, Treatment::None}] +
         p * (alpha * mu[{t, Treatment::T3}] + (1.0 - alpha) * mu[{t, Treatment::T4}]);
}

double true_te(const ExposureValues& mu, double p) {
  if (!mu.all_finite()) throw ValidationError("mu", "means must be finite");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p", "p must lie in [0, 1]");
  return (1.0 - p) * (mu.y10() - mu.y20()) + p * (mu.y13() - mu.y24());
}

double resolve_observed_outcome(const PotentialOutcomeProfile& profile,
                                TreatmentExposure exposure) {
  return profile[exposure];
}

}  // namespace xsite
