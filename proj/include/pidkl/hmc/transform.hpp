#pragma once

#include <vector>

#include "pidkl/types.hpp"

namespace pidkl::hmc {

/// Per-component bijection between an unconstrained sampling space and the
/// constrained parameter space: logit for box-supported parameters, log for
/// positive scales, identity otherwise.
struct ComponentMap {
  enum class Kind { kIdentity, kLog, kLogit } kind = Kind::kIdentity;
  double lo = 0.0;
  double hi = 1.0;

  static ComponentMap identity() { return {Kind::kIdentity}; }
  static ComponentMap log_scale() { return {Kind::kLog}; }
  static ComponentMap logit(double lo, double hi) {
    return {Kind::kLogit, lo, hi};
  }

  double to_constrained(double z) const;
  double to_unconstrained(double c) const;
  double log_jacobian(double z) const;  // log |d constrained / d z|
};

struct ParamTransform {
  std::vector<ComponentMap> maps;

  int dim() const { return static_cast<int>(maps.size()); }
  Vec to_constrained(const Vec& z) const;
  Vec to_unconstrained(const Vec& c) const;
  double log_jacobian(const Vec& z) const;

  /// logit maps for every component of a box.
  static ParamTransform box(const Vec& lo, const Vec& hi);
};

}  // namespace pidkl::hmc
