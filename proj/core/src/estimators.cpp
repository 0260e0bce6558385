#include "xsite/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "xsite/errors.hpp"
#include "xsite/regression.hpp"

namespace xsite {

namespace {

constexpr std::size_t cell_slot(Cluster c, Treatment t) {
  return (c == Cluster::C1 ? 0 : 2) + (t == Treatment::T1 ? 0 : 1);
}

constexpr std::array<std::pair<Cluster, Treatment>, 4> kCellOrder{{
    {Cluster::C1, Treatment::T1},
    {Cluster::C1, Treatment::T2},
    {Cluster::C2, Treatment::T1},
    {Cluster::C2, Treatment::T2},
}};

std::string cell_label(Cluster c, Treatment t) {
  return "(" + std::string(to_string(c)) + "," + std::string(to_string(t)) + ")";
}

EffectEstimate make_estimate(Method method, double point, double se, std::size_t n, double level) {
  EffectEstimate e;
  e.method = method;
  e.point = point;
  e.std_error = se;
  e.n_total = n;
  e.ci = normal_interval(point, se, level);
  return e;
}

std::array<std::size_t, 4> cell_counts(const Site1Log& log) {
  std::array<std::size_t, 4> counts{};
  for (std::size_t i = 0; i < log.size(); ++i) ++counts[cell_slot(log.cluster(i), log.treatment(i))];
  return counts;
}

void require_non_empty(const std::array<std::size_t, 4>& counts, const std::string& bin = {}) {
  for (std::size_t k = 0; k < 4; ++k) {
    if (counts[k] == 0) throw EmptyCellError(cell_label(kCellOrder[k].first, kCellOrder[k].second), bin);
  }
}

/// Rows of the two given cells; z = 1 for rows from `treated`.
RegressionDataset cross_cell_dataset(const Site1Log& log, std::size_t treated, std::size_t control) {
  RegressionDataset data;
  data.d = log.covariate_dim();
  for (std::size_t i = 0; i < log.size(); ++i) {
    const std::size_t s = cell_slot(log.cluster(i), log.treatment(i));
    if (s != treated && s != control) continue;
    data.y.push_back(log.outcome(i));
    data.z.push_back(s == treated ? 1 : 0);
    const auto x = log.covariates(i);
    data.x.insert(data.x.end(), x.begin(), x.end());
  }
  return data;
}

}  // namespace

CellQuartet::CellQuartet(const std::array<CellSummary, 4>& cells) {
  std::array<bool, 4> seen{};
  for (const CellSummary& c : cells) {
    c.validate();
    const std::size_t s = cell_slot(c.cluster, c.treatment);
    if (seen[s]) throw ValidationError("quartet", "duplicate cell " + c.label());
    seen[s] = true;
    cells_[s] = c;
  }
}

const CellSummary& CellQuartet::cell(Cluster c, Treatment t) const {
  if (t != Treatment::T1 && t != Treatment::T2) throw ValidationError("treatment", "must be T1 or T2");
  return cells_[cell_slot(c, t)];
}

std::size_t CellQuartet::n_total() const noexcept {
  std::size_t n = 0;
  for (const auto& c : cells_) n += c.n;
  return n;
}

CellQuartet CellQuartet::swapped_clusters() const {
  std::array<CellSummary, 4> out = cells_;
  for (auto& c : out) c.cluster = c.cluster == Cluster::C1 ? Cluster::C2 : Cluster::C1;
  return CellQuartet(out);
}

CellQuartet summarize_cells(const Site1Log& log, std::optional<OutcomeBounds> bounds) {
  if (bounds && !(bounds->lo <= bounds->hi)) {
    throw ValidationError("outcome_bounds", "lo must not exceed hi");
  }
  std::array<std::size_t, 4> n{};
  std::array<double, 4> mean{};
  std::array<double, 4> m2{};
  for (std::size_t i = 0; i < log.size(); ++i) {
    const double y = log.outcome(i);
    if (bounds && (y < bounds->lo || y > bounds->hi)) {
      std::ostringstream msg;
      msg << "outcome " << y << " at row " << i << " lies outside [" << bounds->lo << ", "
          << bounds->hi << "]";
      throw ValidationError("outcome_bounds", msg.str());
    }
    const std::size_t s = cell_slot(log.cluster(i), log.treatment(i));
    ++n[s];
    const double delta = y - mean[s];
    mean[s] += delta / static_cast<double>(n[s]);
    m2[s] += delta * (y - mean[s]);
  }
  require_non_empty(n);
  std::array<CellSummary, 4> cells;
  for (std::size_t k = 0; k < 4; ++k) {
    cells[k].cluster = kCellOrder[k].first;
    cells[k].treatment = kCellOrder[k].second;
    cells[k].n = n[k];
    cells[k].mean = mean[k];
    cells[k].sample_variance = n[k] > 1 ? std::max(0.0, m2[k] / static_cast<double>(n[k] - 1)) : 0.0;
    cells[k].outcome_bounds = bounds;
  }
  return CellQuartet(cells);
}

std::array<double, 4> corrected_weights(double alpha) {
  require_identifiable_alpha(alpha);
  const double inv = 1.0 / (2.0 * alpha - 1.0);
  return {alpha * inv, (1.0 - alpha) * inv, -(1.0 - alpha) * inv, -alpha * inv};
}

EffectEstimate naive_ate(const CellQuartet& quartet, double level) {
  // Pooled mean and variance of a treatment group from its two cells.
  auto pooled = [&](Treatment t) {
    const CellSummary& a = quartet.cell(Cluster::C1, t);
    const CellSummary& b = quartet.cell(Cluster::C2, t);
    const double n = static_cast<double>(a.n + b.n);
    const double m = (static_cast<double>(a.n) * a.mean + static_cast<double>(b.n) * b.mean) / n;
    const double ss = static_cast<double>(a.n - 1) * a.sample_variance +
                      static_cast<double>(b.n - 1) * b.sample_variance +
                      static_cast<double>(a.n) * (a.mean - m) * (a.mean - m) +
                      static_cast<double>(b.n) * (b.mean - m) * (b.mean - m);
    const double var = n > 1.0 ? ss / (n - 1.0) : 0.0;
    return std::pair{m, var / n};
  };
  const auto [m1, v1] = pooled(Treatment::T1);
  const auto [m2, v2] = pooled(Treatment::T2);
  return make_estimate(Method::Naive, m1 - m2, std::sqrt(v1 + v2), quartet.n_total(), level);
}

EffectEstimate corrected_te(const CellQuartet& quartet, double alpha, double level) {
  const auto w = corrected_weights(alpha);
  double point = 0.0;
  double var = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const CellSummary& c = quartet.cells()[k];
    point += w[k] * c.mean;
    var += w[k] * w[k] * c.mean_variance();
  }
  return make_estimate(Method::Corrected, point, std::sqrt(var), quartet.n_total(), level);
}

EffectEstimate covariate_adjusted_ate(const Site1Log& log, double alpha, double level) {
  require_identifiable_alpha(alpha);
  require_non_empty(cell_counts(log));
  const RegressionFit fit1 = ols_fit(cross_cell_dataset(log, cell_slot(Cluster::C1, Treatment::T1),
                                                        cell_slot(Cluster::C2, Treatment::T2)));
  const RegressionFit fit2 = ols_fit(cross_cell_dataset(log, cell_slot(Cluster::C2, Treatment::T1),
                                                        cell_slot(Cluster::C1, Treatment::T2)));
  const double inv = 1.0 / (2.0 * alpha - 1.0);
  const double w1 = alpha * inv;
  const double w2 = (alpha - 1.0) * inv;
  const double point = w1 * fit1.beta_z + w2 * fit2.beta_z;
  const double se = std::sqrt(w1 * w1 * fit1.beta_z_std_error * fit1.beta_z_std_error +
                              w2 * w2 * fit2.beta_z_std_error * fit2.beta_z_std_error);
  return make_estimate(Method::CorrectedCovAdj, point, se, log.size(), level);
}

EffectEstimate naive_adjusted_ate(const Site1Log& log, double level) {
  require_non_empty(cell_counts(log));
  RegressionDataset data;
  data.d = log.covariate_dim();
  data.y = log.outcomes();
  data.z.reserve(log.size());
  data.x.reserve(log.size() * data.d);
  for (std::size_t i = 0; i < log.size(); ++i) {
    data.z.push_back(log.treatment(i) == Treatment::T1 ? 1 : 0);
    const auto x = log.covariates(i);
    data.x.insert(data.x.end(), x.begin(), x.end());
  }
  const RegressionFit fit = ols_fit(data);
  return make_estimate(Method::NaiveCovAdj, fit.beta_z, fit.beta_z_std_error, log.size(), level);
}

void CovariateBinning::validate(std::size_t covariate_dim) const {
  if (column >= covariate_dim) {
    throw ValidationError("bins.column", "covariate column x" + std::to_string(column + 1) +
                                             " does not exist (dimension " + std::to_string(covariate_dim) + ")");
  }
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (!std::isfinite(cuts[i])) throw ValidationError("bins.cuts", "cut points must be finite");
    if (i > 0 && !(cuts[i] > cuts[i - 1])) {
      throw ValidationError("bins.cuts", "cut points must be strictly increasing");
    }
  }
}

std::size_t CovariateBinning::bin_of(double value) const {
  return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

std::string CovariateBinning::label(std::size_t bin) const {
  std::ostringstream os;
  os << 'x' << (column + 1) << " in ";
  if (bin == 0) os << "(-inf";
  else os << '[' << cuts[bin - 1];
  os << ", ";
  if (bin == cuts.size()) os << "inf)";
  else os << cuts[bin] << ")";
  return os.str();
}

std::vector<CovariateBin> bin_by_covariate(const Site1Log& log, const CovariateBinning& binning) {
  binning.validate(log.covariate_dim());
  std::vector<CovariateBin> bins;
  for (std::size_t b = 0; b < binning.n_bins(); ++b) {
    bins.push_back({binning.label(b), Site1Log(log.covariate_dim())});
  }
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto x = log.covariates(i);
    bins[binning.bin_of(x[binning.column])].log.push_back(log.cluster(i), log.treatment(i),
                                                           log.outcome(i), x);
  }
  return bins;
}

std::vector<BinEstimate> corrected_cate(const std::vector<CovariateBin>& bins, double alpha,
                                        double level) {
  require_identifiable_alpha(alpha);
  std::vector<BinEstimate> out;
  out.reserve(bins.size());
  for (const CovariateBin& bin : bins) {
    require_non_empty(cell_counts(bin.log), bin.label);
    EffectEstimate e = corrected_te(summarize_cells(bin.log), alpha, level);
    e.method = Method::CATE;
    out.push_back({bin.label, e});
  }
  return out;
}

double variance_multiplier(double alpha) {
  require_identifiable_alpha(alpha);
  const double u = 2.0 * alpha - 1.0;
  return 2.0 * (alpha * alpha + (1.0 - alpha) * (1.0 - alpha)) / (u * u);
}

VarianceBound variance_bound(const CellQuartet& quartet, double alpha) {
  VarianceBound b;
  b.multiplier = variance_multiplier(alpha);
  b.v_min = std::numeric_limits<double>::infinity();
  b.v_max = -std::numeric_limits<double>::infinity();
  double mv_min = std::numeric_limits<double>::infinity();
  double mv_max = -std::numeric_limits<double>::infinity();
  for (const CellSummary& c : quartet.cells()) {
    b.v_min = std::min(b.v_min, c.sample_variance);
    b.v_max = std::max(b.v_max, c.sample_variance);
    mv_min = std::min(mv_min, c.mean_variance());
    mv_max = std::max(mv_max, c.mean_variance());
  }
  b.var_lower = b.multiplier * mv_min;
  b.var_upper = b.multiplier * mv_max;
  return b;
}

double hoeffding_half_width(const CellQuartet& quartet, double alpha, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level", "confidence level must lie in (0, 1)");
  const auto w = corrected_weights(alpha);
  const double delta_cell = (1.0 - level) / 4.0;
  double half = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const CellSummary& c = quartet.cells()[k];
    if (!c.outcome_bounds) {
      throw ValidationError("outcome_bounds",
                            "Hoeffding interval needs outcome bounds for cell " + c.label() +
                                "; supply the outcome range (e.g. --bounds lo,hi)");
    }
    const double range = c.outcome_bounds->hi - c.outcome_bounds->lo;
    half += std::abs(w[k]) * range *
            std::sqrt(std::log(2.0 / delta_cell) / (2.0 * static_cast<double>(c.n)));
  }
  return half;
}

ConfidenceInterval hoeffding_ci(const CellQuartet& quartet, double alpha, double level) {
  const double half = hoeffding_half_width(quartet, alpha, level);
  const double point = corrected_te(quartet, alpha).point;
  return {point - half, point + half, level};
}

}  // namespace xsite
