#include "pidkl/gp/gpr.hpp"

namespace pidkl::gp {

namespace {

Mat kernel_matrix(const std::vector<Point>& a, const std::vector<Point>& b,
                  const kernel::FeatureMap& theta,
                  const kernel::KernelHyper& hyper) {
  Mat k(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          kernel::deep_kernel(a[i], b[j], theta, hyper);
  return k;
}

}  // namespace

GprPrediction gpr_predict(const std::vector<Point>& train_points,
                          const Vec& train_values,
                          const kernel::FeatureMap& theta,
                          const kernel::KernelHyper& hyper, double tau_sq,
                          const std::vector<Point>& test_points) {
  if (train_points.empty())
    throw std::invalid_argument("gpr_predict: need at least one observation");
  const Mat kuu = kernel_matrix(train_points, train_points, theta, hyper);
  const CholFactor chol = chol_jitter(kuu, tau_sq);
  const Vec alpha = chol.solve(train_values);
  const Mat kstar = kernel_matrix(train_points, test_points, theta, hyper);

  GprPrediction out;
  out.mean = kstar.transpose() * alpha;
  const Mat v = chol.solve_lower(kstar);
  out.variance = Vec(test_points.size());
  for (std::size_t j = 0; j < test_points.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double prior = kernel::deep_kernel(test_points[j], test_points[j],
                                             theta, hyper);
    out.variance[jj] = std::max(0.0, prior - v.col(jj).squaredNorm());
  }
  return out;
}

ConditionedMean::ConditionedMean(std::vector<Point> train_points,
                                 const Vec& train_values,
                                 const kernel::FeatureMap& theta,
                                 const kernel::KernelHyper& hyper,
                                 double tau_sq)
    : points_(std::move(train_points)), theta_(&theta), hyper_(hyper) {
  const Mat kuu = kernel_matrix(points_, points_, *theta_, hyper_);
  alpha_ = chol_jitter(kuu, tau_sq).solve(train_values);
}

double ConditionedMean::operator()(const Point& s) const {
  double m = 0.0;
  const Vec zs = (*theta_)(s);
  for (std::size_t i = 0; i < points_.size(); ++i)
    m += alpha_[static_cast<Eigen::Index>(i)] *
         kernel::base_rbf(zs, (*theta_)(points_[i]), hyper_);
  return m;
}

}  // namespace pidkl::gp
