#include "pidkl/predict/summary.hpp"

#include <algorithm>
#include <cmath>

namespace pidkl::predict {

double quantile(const Vec& draws, double q) {
  const int n = static_cast<int>(draws.size());
  if (n == 0) throw std::invalid_argument("quantile: empty sample");
  std::vector<double> x(draws.data(), draws.data() + n);
  std::sort(x.begin(), x.end());
  if (n == 1) return x[0];
  const double h = q * (n - 1);
  const int lo = std::clamp(static_cast<int>(std::floor(h)), 0, n - 2);
  const double frac = h - lo;
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

MarginalSummary marginal_stats(const hmc::SampleChain& chain,
                               const std::vector<int>& columns) {
  const int n = chain.n_draws();
  if (n < 2) throw std::invalid_argument("marginal_stats: need >= 2 draws");
  const int k = static_cast<int>(columns.size());

  MarginalSummary s;
  s.mean = Vec(k);
  s.sd = Vec(k);
  s.ci_lo = Vec(k);
  s.ci_hi = Vec(k);
  s.covariance = Mat(k, k);
  Mat x(n, k);
  for (int j = 0; j < k; ++j) {
    x.col(j) = chain.draws.col(columns[j]);
    if (!chain.names.empty()) s.names.push_back(chain.names[columns[j]]);
    s.mean[j] = x.col(j).mean();
    s.ci_lo[j] = quantile(x.col(j), 0.025);
    s.ci_hi[j] = quantile(x.col(j), 0.975);
  }
  const Mat centered = x.rowwise() - s.mean.transpose();
  s.covariance = centered.transpose() * centered / (n - 1);
  for (int j = 0; j < k; ++j) s.sd[j] = std::sqrt(s.covariance(j, j));
  return s;
}

MarginalSummary marginal_stats_phi(const hmc::SampleChain& chain, int n_phi) {
  std::vector<int> cols(n_phi);
  for (int i = 0; i < n_phi; ++i) cols[i] = i;
  return marginal_stats(chain, cols);
}

}  // namespace pidkl::predict
