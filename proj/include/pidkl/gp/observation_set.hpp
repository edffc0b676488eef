#pragma once

#include <vector>

#include "pidkl/types.hpp"

namespace pidkl::gp {

/// Exact observations of the state u and the source f, with the nugget
/// variances used to stabilize kernel-matrix factorizations.
struct ObservationSet {
  std::vector<Point> s_u;
  Vec u;
  std::vector<Point> s_f;
  Vec f;
  double tau_u_sq = 1e-6;
  double tau_f_sq = 1e-6;

  int n_u() const { return static_cast<int>(s_u.size()); }
  int n_f() const { return static_cast<int>(s_f.size()); }
  int n_total() const { return n_u() + n_f(); }

  Vec d_joint() const {
    Vec d(n_total());
    d.head(n_u()) = u;
    d.tail(n_f()) = f;
    return d;
  }

  void validate() const {
    if (n_u() < 1) throw std::invalid_argument("observations: N_u must be >= 1");
    if (u.size() != n_u() || f.size() != n_f())
      throw std::invalid_argument("observations: value/location count mismatch");
    if (!(tau_u_sq > 0.0) || !(tau_f_sq > 0.0))
      throw std::invalid_argument("observations: nuggets must be positive");
  }
};

}  // namespace pidkl::gp
