#pragma once

#include "pidkl/types.hpp"

namespace pidkl::gp {

/// Lower-triangular Cholesky factor of a jittered symmetric matrix.
struct CholFactor {
  Mat lower;
  double jitter_used = 0.0;

  int n() const { return static_cast<int>(lower.rows()); }

  Vec solve(const Vec& rhs) const;       // (L L^T)^-1 rhs
  Mat solve(const Mat& rhs) const;
  Vec solve_lower(const Vec& rhs) const; // L^-1 rhs
  Mat solve_lower(const Mat& rhs) const;
  double log_det() const;                // log |L L^T|
};

/// Factorizes K + (base_nugget + jitter) I, escalating jitter x10 from
/// 1e-10 up to 1e-4 until the factorization succeeds. Throws (listing the
/// attempted ladder) if even the largest jitter fails.
CholFactor chol_jitter(const Mat& k, double base_nugget);

}  // namespace pidkl::gp
