#pragma once

#include <vector>

#include "pidkl/hmc/sampler.hpp"

namespace pidkl::predict {

/// Marginal posterior statistics for a subset of chain columns.
struct MarginalSummary {
  std::vector<std::string> names;
  Vec mean;
  Vec sd;
  Vec ci_lo;  // 2.5% sample quantile
  Vec ci_hi;  // 97.5% sample quantile
  Mat covariance;
};

/// Sample quantile by linear interpolation of order statistics.
double quantile(const Vec& draws, double q);

MarginalSummary marginal_stats(const hmc::SampleChain& chain,
                               const std::vector<int>& columns);

/// All phi columns, assuming the chain layout [phi..., psi...].
MarginalSummary marginal_stats_phi(const hmc::SampleChain& chain, int n_phi);

}  // namespace pidkl::predict
