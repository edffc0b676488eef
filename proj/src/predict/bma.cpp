#include "pidkl/predict/bma.hpp"

namespace pidkl::predict {

PredictiveField bma_predict(const hmc::SampleChain& chain, int thin,
                            const gp::ObservationSet& obs,
                            const kernel::FeatureMap& theta_fix,
                            const pde::LinearOperatorSpec& op,
                            const pde::StencilPolicy& policy, int n_phi,
                            const std::vector<Point>& test_points) {
  if (thin < 1) throw std::invalid_argument("bma_predict: thin must be >= 1");
  if (chain.n_draws() < 1)
    throw std::invalid_argument("bma_predict: empty chain");
  const int nt = static_cast<int>(test_points.size());
  const int p = chain.dim() - n_phi - 1;
  if (p < 1) throw std::invalid_argument("bma_predict: chain layout mismatch");

  const gp::JointModel model(obs, theta_fix, op, policy, n_phi);

  PredictiveField out;
  out.points = test_points;
  Vec mean_sum = Vec::Zero(nt);
  Mat cov_sum = Mat::Zero(nt, nt);
  std::vector<Vec> means;
  for (int j = 0; j < chain.n_draws(); j += thin) {
    const Vec row = chain.draws.row(j).transpose();
    const Vec phi = row.head(n_phi);
    kernel::KernelHyper hyper;
    hyper.log_sf2 = std::log(row[n_phi]);
    hyper.log_len = row.tail(p).array().log().matrix();
    try {
      gp::JointModel::Prediction pred = model.predict(hyper, phi, test_points);
      mean_sum += pred.mean;
      cov_sum += pred.cov;
      means.push_back(std::move(pred.mean));
      ++out.draws_used;
    } catch (const std::exception&) {
      ++out.draws_skipped;
    }
  }
  if (out.draws_used == 0)
    throw std::runtime_error(
        "bma_predict: every retained draw failed to factorize");

  const double inv_j = 1.0 / out.draws_used;
  out.mean = inv_j * mean_sum;
  Mat within = inv_j * cov_sum;
  Mat between = Mat::Zero(nt, nt);
  for (const Vec& m : means) {
    const Vec d = m - out.mean;
    between += d * d.transpose();
  }
  between *= inv_j;  // population covariance: zero for a single draw
  out.covariance = within + between;
  out.within_variance = within.diagonal();
  out.between_variance = between.diagonal();
  return out;
}

}  // namespace pidkl::predict
