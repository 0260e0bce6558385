#pragma once

// Ordinary least squares y ~ 1 + z + X with a binary treatment indicator z.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace xsite {

struct RegressionDataset {
  std::vector<double> y;
  /// Row-major n x d covariate matrix.
  std::vector<double> x;
  std::size_t d = 0;
  std::vector<std::uint8_t> z;

  std::size_t n() const noexcept { return y.size(); }
};

struct RegressionFit {
  double intercept = 0.0;
  double beta_z = 0.0;
  std::vector<double> gamma;
  /// RSS / (n - rank).
  double residual_variance = 0.0;
  double beta_z_std_error = 0.0;
  std::size_t n = 0;
  std::size_t rank = 0;
  bool rank_deficient = false;
  /// Covariate columns found linearly dependent on earlier columns; their
  /// gamma entries are fixed at 0.
  std::vector<std::size_t> dropped_columns;
};

/// Relative rank tolerance applied to the largest column norm.
inline constexpr double kRankTolerance = 1e-10;

/// Householder QR fit (group-means fast path when d = 0). Throws
/// RegressionError on constant z, n <= d + 1, non-finite input or mismatched
/// sizes.
RegressionFit ols_fit(const RegressionDataset& data);

}  // namespace xsite
