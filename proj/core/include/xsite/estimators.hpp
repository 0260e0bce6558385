#pragma once

// Effect estimators over website 1's observations.
//
// With site-2 allocation alpha in C1 and 1 - alpha in C2, the combination
//
//   TE = ( alpha Y[C1,T1] + (1-alpha) Y[C1,T2] - (1-alpha) Y[C2,T1] - alpha Y[C2,T2] ) / (2 alpha - 1)
//
// cancels the contributions of users who saw a mismatched treatment on
// website 2, leaving (1-p) E[Y10 - Y20] + p E[Y13 - Y24].

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "xsite/core_model.hpp"
#include "xsite/site1_log.hpp"

namespace xsite {

/// The four site-1 cells, all non-empty.
class CellQuartet {
 public:
  /// Cells may be given in any order; each (cluster, treatment) must appear
  /// exactly once. Throws EmptyCellError / ValidationError.
  explicit CellQuartet(const std::array<CellSummary, 4>& cells);

  const CellSummary& cell(Cluster c, Treatment t) const;
  const std::array<CellSummary, 4>& cells() const noexcept { return cells_; }
  std::size_t n_total() const noexcept;

  /// Same observations with the cluster labels exchanged.
  CellQuartet swapped_clusters() const;

 private:
  // Order: (C1,T1) (C1,T2) (C2,T1) (C2,T2).
  std::array<CellSummary, 4> cells_;
};

/// Aggregates a log into cells. Throws EmptyCellError naming the first
/// missing cell. Sample variance uses n - 1 (0 for a single observation).
CellQuartet summarize_cells(const Site1Log& log, std::optional<OutcomeBounds> bounds = std::nullopt);

/// Weights applied to (C1,T1) (C1,T2) (C2,T1) (C2,T2) by the corrected
/// estimator.
std::array<double, 4> corrected_weights(double alpha);

inline constexpr double kDefaultLevel = 0.95;

/// Pooled T1 mean minus pooled T2 mean, ignoring clusters.
EffectEstimate naive_ate(const CellQuartet& quartet, double level = kDefaultLevel);

EffectEstimate corrected_te(const CellQuartet& quartet, double alpha, double level = kDefaultLevel);

/// Covariate adjustment with two cross-cluster regressions: beta1 from
/// (C1,T1) vs (C2,T2), beta2 from (C2,T1) vs (C1,T2), combined as
/// (alpha beta1 + (alpha - 1) beta2) / (2 alpha - 1).
EffectEstimate covariate_adjusted_ate(const Site1Log& log, double alpha, double level = kDefaultLevel);

/// y ~ 1 + X + z over every row, z = 1 for T1.
EffectEstimate naive_adjusted_ate(const Site1Log& log, double level = kDefaultLevel);

/// Half-open intervals on one covariate column cut at increasing `cuts`:
/// (-inf, c0), [c0, c1), ..., [c_last, inf).
struct CovariateBinning {
  std::size_t column = 0;
  std::vector<double> cuts;

  void validate(std::size_t covariate_dim) const;
  std::size_t bin_of(double value) const;
  std::string label(std::size_t bin) const;
  std::size_t n_bins() const noexcept { return cuts.size() + 1; }
};

struct CovariateBin {
  std::string label;
  Site1Log log;
};

std::vector<CovariateBin> bin_by_covariate(const Site1Log& log, const CovariateBinning& binning);

struct BinEstimate {
  std::string label;
  EffectEstimate estimate;
};

/// Corrected estimator within each bin. EmptyCellError names the bin.
std::vector<BinEstimate> corrected_cate(const std::vector<CovariateBin>& bins, double alpha,
                                        double level = kDefaultLevel);

struct VarianceBound {
  /// Smallest and largest per-cell sample variance.
  double v_min = 0.0;
  double v_max = 0.0;
  /// 2 (alpha^2 + (1-alpha)^2) / (2 alpha - 1)^2
  double multiplier = 0.0;
  /// multiplier * min / max over cells of sample_variance / n.
  double var_lower = 0.0;
  double var_upper = 0.0;
};

double variance_multiplier(double alpha);

VarianceBound variance_bound(const CellQuartet& quartet, double alpha);

/// Non-asymptotic interval from per-cell Hoeffding bounds, 1 - level split
/// equally over the four cells. Every cell needs outcome bounds.
ConfidenceInterval hoeffding_ci(const CellQuartet& quartet, double alpha, double level);

/// Half-width of hoeffding_ci.
double hoeffding_half_width(const CellQuartet& quartet, double alpha, double level);

}  // namespace xsite
