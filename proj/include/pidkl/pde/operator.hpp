#pragma once

#include <functional>
#include <vector>

#include "pidkl/diff/stencil.hpp"
#include "pidkl/types.hpp"

namespace pidkl::pde {

/// Coefficient of one operator term, affine in the PDE parameters:
/// c(s, phi) = base(s) + sum_m weights[m](s) * phi[m].
/// All bundled problems have coefficients of this form, and the affine
/// structure is what lets the pretraining tape and the sampler treat the
/// parameter dependence exactly.
struct PhiAffineCoeff {
  std::function<double(const Point&)> base;
  std::vector<std::function<double(const Point&)>> weights;

  double eval(const Point& s, const Vec& phi) const;
  static PhiAffineCoeff constant(double c);
};

/// One term c(s, phi) * D^a where a is a derivative multi-index over
/// (t, x_1..x_dx). Temporal order <= 1, spatial order <= 2.
struct OperatorTerm {
  PhiAffineCoeff coeff;
  std::vector<int> derivative;
};

/// A[.; phi] as a sum of coefficient-times-derivative terms.
struct LinearOperatorSpec {
  std::vector<OperatorTerm> terms;
  int dx = 0;

  int dim() const { return dx + 1; }
  void validate() const;
};

/// How operator derivatives are discretized: per-coordinate base step
/// (fraction of the coordinate range), tableau accuracy order, and whether
/// steps shrink so the stencil footprint stays inside the domain.
struct StencilPolicy {
  Domain domain;
  double step_fraction = 1e-3;
  double step_cap = 0.0;  // absolute per-coordinate cap; 0 disables
  int accuracy = 2;
  bool shrink_to_domain = true;

  /// Policy for operator application to fields (order-2 tableau, step
  /// 1e-3 x range, boundary-shrunk).
  static StencilPolicy for_fields(const Domain& d);

  /// Policy for operator-transformed kernels: order-4 tableau, step
  /// min(3e-2 x range, 0.04), no shrinking (the kernel is globally
  /// defined). The larger step keeps the fourth-difference round-off about
  /// two orders below the truncation error.
  static StencilPolicy for_kernels(const Domain& d);

  /// Steps at `s` for a term with the given multi-index.
  Vec steps_at(const Point& s, const std::vector<int>& multi_index) const;
};

/// Tensor-product stencil for one term at a point under the policy.
diff::Stencil term_stencil(const OperatorTerm& term, const Point& s,
                           const StencilPolicy& policy);

/// sum_terms c(s, phi) * (central-difference derivative of field at s).
double apply_operator(const LinearOperatorSpec& op,
                      const std::function<double(const Point&)>& field,
                      const Point& s, const Vec& phi,
                      const StencilPolicy& policy);

}  // namespace pidkl::pde
