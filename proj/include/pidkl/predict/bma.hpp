#pragma once

#include "pidkl/hmc/sampler.hpp"

namespace pidkl::predict {

/// Bayesian-model-averaged forward prediction of the solution field.
struct PredictiveField {
  std::vector<Point> points;
  Vec mean;
  Mat covariance;       // within + between
  Vec within_variance;  // average conditional variance per point
  Vec between_variance; // variance of the conditional means per point
  int draws_used = 0;
  int draws_skipped = 0;
};

/// Averages the per-draw conditional GP predictions (conditioned on the full
/// joint observation vector) over every `thin`-th retained draw. Draws whose
/// factorizations fail are skipped and counted; all draws failing is an error.
PredictiveField bma_predict(const hmc::SampleChain& chain, int thin,
                            const gp::ObservationSet& obs,
                            const kernel::FeatureMap& theta_fix,
                            const pde::LinearOperatorSpec& op,
                            const pde::StencilPolicy& policy, int n_phi,
                            const std::vector<Point>& test_points);

}  // namespace pidkl::predict
