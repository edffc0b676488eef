#pragma once

#include <vector>

#include "pidkl/gp/cholesky.hpp"
#include "pidkl/kernel/kernel.hpp"
#include "pidkl/types.hpp"

namespace pidkl::gp {

struct GprPrediction {
  Vec mean;
  Vec variance;  // clamped at zero
};

/// Zero-prior-mean GPR under the deep kernel, conditioned on the state
/// observations only (Eqs. of the standard predictive formulas).
GprPrediction gpr_predict(const std::vector<Point>& train_points,
                          const Vec& train_values,
                          const kernel::FeatureMap& theta,
                          const kernel::KernelHyper& hyper, double tau_sq,
                          const std::vector<Point>& test_points);

/// Reusable conditioned surrogate: factorizes once, then evaluates the
/// predictive mean at arbitrary points (the u-surrogate of the PDE loss).
class ConditionedMean {
 public:
  ConditionedMean(std::vector<Point> train_points, const Vec& train_values,
                  const kernel::FeatureMap& theta,
                  const kernel::KernelHyper& hyper, double tau_sq);

  double operator()(const Point& s) const;

 private:
  std::vector<Point> points_;
  const kernel::FeatureMap* theta_;
  kernel::KernelHyper hyper_;
  Vec alpha_;  // (K + tau^2 I)^-1 y
};

}  // namespace pidkl::gp
