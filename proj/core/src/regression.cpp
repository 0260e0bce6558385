#include "xsite/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xsite/errors.hpp"

namespace xsite {

namespace {

void validate(const RegressionDataset& data) {
  using Kind = RegressionError::Kind;
  const std::size_t n = data.n();
  if (data.z.size() != n || data.x.size() != n * data.d) {
    throw RegressionError(Kind::DimensionMismatch, "y, z and X must have matching row counts");
  }
  if (n <= data.d + 1) {
    throw RegressionError(Kind::Underdetermined,
                          "underdetermined fit: n = " + std::to_string(n) +
                              " must exceed d + 1 = " + std::to_string(data.d + 1));
  }
  for (double v : data.y) {
    if (!std::isfinite(v)) throw RegressionError(Kind::NonFinite, "non-finite outcome");
  }
  for (double v : data.x) {
    if (!std::isfinite(v)) throw RegressionError(Kind::NonFinite, "non-finite covariate");
  }
  std::size_t n1 = 0;
  for (std::uint8_t zi : data.z) {
    if (zi > 1) throw RegressionError(Kind::NonFinite, "treatment indicator must be 0 or 1");
    n1 += zi;
  }
  if (n1 == 0 || n1 == n) {
    throw RegressionError(Kind::NoContrast, "treatment indicator is constant; no contrast to estimate");
  }
}

RegressionFit group_means_fit(const RegressionDataset& data) {
  const std::size_t n = data.n();
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    sum[data.z[i]] += data.y[i];
    ++cnt[data.z[i]];
  }
  const double m0 = sum[0] / static_cast<double>(cnt[0]);
  const double m1 = sum[1] / static_cast<double>(cnt[1]);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = data.y[i] - (data.z[i] ? m1 : m0);
    rss += r * r;
  }
  RegressionFit fit;
  fit.intercept = m0;
  fit.beta_z = m1 - m0;
  fit.n = n;
  fit.rank = 2;
  fit.residual_variance = rss / static_cast<double>(n - 2);
  fit.beta_z_std_error = std::sqrt(fit.residual_variance *
                                   (1.0 / static_cast<double>(cnt[0]) + 1.0 / static_cast<double>(cnt[1])));
  return fit;
}

}  // namespace

RegressionFit ols_fit(const RegressionDataset& data) {
  validate(data);
  if (data.d == 0) return group_means_fit(data);

  const std::size_t n = data.n();
  const std::size_t p = data.d + 2;

  // Column-major design [1, z, X].
  std::vector<double> a(n * p);
  auto at = [&](std::size_t row, std::size_t col) -> double& { return a[col * n + row]; };
  for (std::size_t i = 0; i < n; ++i) {
    at(i, 0) = 1.0;
    at(i, 1) = data.z[i];
    for (std::size_t j = 0; j < data.d; ++j) at(i, 2 + j) = data.x[i * data.d + j];
  }
  std::vector<double> qty = data.y;

  double max_norm = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += at(i, j) * at(i, j);
    max_norm = std::max(max_norm, std::sqrt(s));
  }
  const double tol = kRankTolerance * max_norm;

  RegressionFit fit;
  fit.n = n;
  std::vector<std::size_t> kept;
  std::vector<double> v(n);

  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t k = kept.size();
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += at(i, j) * at(i, j);
    norm = std::sqrt(norm);
    if (norm <= tol) {
      if (j == 1) {
        throw RegressionError(RegressionError::Kind::NoContrast,
                              "treatment indicator is collinear with the intercept");
      }
      fit.rank_deficient = true;
      fit.dropped_columns.push_back(j - 2);
      continue;
    }
    // Householder reflector zeroing rows k+1.. of column j.
    const double alpha = at(k, j) > 0.0 ? -norm : norm;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) {
      v[i] = at(i, j);
      if (i == k) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 > 0.0) {
      for (std::size_t c = j; c < p; ++c) {
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += v[i] * at(i, c);
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < n; ++i) at(i, c) -= f * v[i];
      }
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i] * qty[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) qty[i] -= f * v[i];
    }
    kept.push_back(j);
  }

  const std::size_t rank = kept.size();
  fit.rank = rank;

  // Back substitution R * coef = (Q^T y)[0:rank].
  std::vector<double> coef(rank, 0.0);
  for (std::size_t r = rank; r-- > 0;) {
    double s = qty[r];
    for (std::size_t c = r + 1; c < rank; ++c) s -= at(r, kept[c]) * coef[c];
    coef[r] = s / at(r, kept[r]);
  }

  fit.gamma.assign(data.d, 0.0);
  for (std::size_t r = 0; r < rank; ++r) {
    const std::size_t col = kept[r];
    if (col == 0) fit.intercept = coef[r];
    else if (col == 1) fit.beta_z = coef[r];
    else fit.gamma[col - 2] = coef[r];
  }

  double rss = 0.0;
  for (std::size_t i = rank; i < n; ++i) rss += qty[i] * qty[i];
  const std::size_t dof = n - rank;
  fit.residual_variance = dof > 0 ? rss / static_cast<double>(dof) : 0.0;

  // [(R^T R)^{-1}]_{zz} = ||R^{-T} e_z||^2, z sits at position 1 of kept.
  std::vector<double> u(rank, 0.0);
  for (std::size_t r = 0; r < rank; ++r) {
    double s = r == 1 ? 1.0 : 0.0;
    for (std::size_t c = 0; c < r; ++c) s -= at(c, kept[r]) * u[c];
    u[r] = s / at(r, kept[r]);
  }
  double uu = 0.0;
  for (double ui : u) uu += ui * ui;
  fit.beta_z_std_error = dof > 0 ? std::sqrt(fit.residual_variance * uu)
                                 : std::numeric_limits<double>::infinity();
  return fit;
}

}  // namespace xsite
