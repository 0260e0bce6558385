#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xsite/core_model.hpp"

namespace xsite {

/// What website 1 can see: per visit its cluster, its own treatment, the
/// observed outcome and the covariates. There is deliberately no user key and
/// no website-2 treatment column.
class Site1Log {
 public:
  explicit Site1Log(std::size_t covariate_dim = 0) : dim_(covariate_dim) {}

  /// Throws ValidationError on wrong covariate length, a non-site-1
  /// treatment or a non-finite value.
  void push_back(Cluster cluster, Treatment treatment, double outcome, std::span<const double> x);
  void reserve(std::size_t n);

  std::size_t size() const noexcept { return outcome_.size(); }
  bool empty() const noexcept { return outcome_.empty(); }
  std::size_t covariate_dim() const noexcept { return dim_; }

  Cluster cluster(std::size_t i) const { return cluster_[i]; }
  Treatment treatment(std::size_t i) const { return treatment_[i]; }
  double outcome(std::size_t i) const { return outcome_[i]; }
  std::span<const double> covariates(std::size_t i) const {
    return {x_.data() + i * dim_, dim_};
  }

  const std::vector<double>& outcomes() const noexcept { return outcome_; }

  friend bool operator==(const Site1Log&, const Site1Log&) = default;

 private:
  std::size_t dim_;
  std::vector<Cluster> cluster_;
  std::vector<Treatment> treatment_;
  std::vector<double> outcome_;
  std::vector<double> x_;
};

}  // namespace xsite
