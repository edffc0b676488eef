#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace pidkl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A spatio-temporal point. Coordinate 0 is time, coordinates 1..d_x are space.
using Point = Eigen::VectorXd;

/// Box domain [0, t_max] x prod_i [x_lo_i, x_hi_i].
struct Domain {
  double t_max = 1.0;
  Vec x_lo;
  Vec x_hi;

  int dx() const { return static_cast<int>(x_lo.size()); }
  int dim() const { return dx() + 1; }

  double lo(int c) const { return c == 0 ? 0.0 : x_lo[c - 1]; }
  double hi(int c) const { return c == 0 ? t_max : x_hi[c - 1]; }
  double range(int c) const { return hi(c) - lo(c); }

  bool contains(const Point& s) const {
    if (s.size() != dim()) return false;
    for (int c = 0; c < dim(); ++c)
      if (s[c] < lo(c) || s[c] > hi(c)) return false;
    return true;
  }

  static Domain unit_box(int dx_) {
    Domain d;
    d.x_lo = Vec::Zero(dx_);
    d.x_hi = Vec::Ones(dx_);
    return d;
  }
};

}  // namespace pidkl
