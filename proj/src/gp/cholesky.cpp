#include "pidkl/gp/cholesky.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pidkl::gp {

Vec CholFactor::solve(const Vec& rhs) const {
  Vec y = lower.triangularView<Eigen::Lower>().solve(rhs);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Mat CholFactor::solve(const Mat& rhs) const {
  Mat y = lower.triangularView<Eigen::Lower>().solve(rhs);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Vec CholFactor::solve_lower(const Vec& rhs) const {
  return lower.triangularView<Eigen::Lower>().solve(rhs);
}

Mat CholFactor::solve_lower(const Mat& rhs) const {
  return lower.triangularView<Eigen::Lower>().solve(rhs);
}

double CholFactor::log_det() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

CholFactor chol_jitter(const Mat& k, double base_nugget) {
  if (k.rows() != k.cols())
    throw std::invalid_argument("chol_jitter: matrix must be square");
  static constexpr double kLadder[] = {0.0,  1e-10, 1e-9, 1e-8,
                                       1e-7, 1e-6,  1e-5, 1e-4};
  for (double jit : kLadder) {
    Mat kj = k;
    kj.diagonal().array() += base_nugget + jit;
    Eigen::LLT<Mat> llt(kj);
    if (llt.info() == Eigen::Success) {
      CholFactor f;
      f.lower = llt.matrixL();
      f.jitter_used = jit;
      // Guard against an LLT that "succeeded" with a degenerate pivot.
      if ((f.lower.diagonal().array() > 0.0).all()) return f;
    }
  }
  std::ostringstream os;
  os << "chol_jitter: factorization failed for n=" << k.rows()
     << " after jitter ladder 0, 1e-10, 1e-9, ..., 1e-4";
  throw std::runtime_error(os.str());
}

}  // namespace pidkl::gp
