#include "xsite/site1_log.hpp"

#include <cmath>
#include <string>

#include "xsite/errors.hpp"

namespace xsite {

void Site1Log::push_back(Cluster cluster, Treatment treatment, double outcome,
                         std::span<const double> x) {
  if (x.size() != dim_) {
    throw ValidationError("x", "expected " + std::to_string(dim_) + " covariates, got " +
                                   std::to_string(x.size()));
  }
  if (treatment != Treatment::T1 && treatment != Treatment::T2) {
    throw ValidationError("treatment", "site-1 log rows must carry T1 or T2");
  }
  if (cluster != Cluster::C1 && cluster != Cluster::C2) {
    throw ValidationError("cluster", "cluster must be C1 or C2");
  }
  if (!std::isfinite(outcome)) throw ValidationError("outcome", "outcome must be finite");
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("x", "covariates must be finite");
  }
  cluster_.push_back(cluster);
  treatment_.push_back(treatment);
  outcome_.push_back(outcome);
  x_.insert(x_.end(), x.begin(), x.end());
}

void Site1Log::reserve(std::size_t n) {
  cluster_.reserve(n);
  treatment_.reserve(n);
  outcome_.reserve(n);
  x_.reserve(n * dim_);
}

}  // namespace xsite
