#pragma once

#include <functional>
#include <vector>

#include "pidkl/types.hpp"

namespace pidkl::diff {

/// One evaluation point of a tensor-product stencil: integer shifts per
/// coordinate (scaled by the per-coordinate step) and the combined weight.
struct StencilPoint {
  std::vector<int> shift;
  double weight = 0.0;
};

/// Central-difference tableau for a mixed partial derivative, formed as the
/// tensor product of per-coordinate 1D tableaux. Weights carry the 1/h^k
/// scaling, so the derivative estimate is sum_i weight_i * field(s + shift_i*step).
struct Stencil {
  std::vector<int> multi_index;  // derivative order per coordinate
  Vec step;                      // positive step per coordinate
  std::vector<StencilPoint> points;

  /// Largest |shift| over all points and coordinates (footprint half-width).
  int max_offset() const;
};

/// 1D central tableau for the k-th derivative (k in 0..2) with accuracy
/// order 2 or 4. Returns (offsets, unscaled weights); scale by 1/h^k.
void central_tableau_1d(int k, int accuracy, std::vector<int>& offsets,
                        std::vector<double>& weights);

/// Builds the tensor-product stencil for `multi_index` with per-coordinate
/// steps. Throws for per-coordinate orders above 2.
Stencil make_stencil(const std::vector<int>& multi_index, const Vec& step,
                     int accuracy = 2);

/// Central-difference estimate of the mixed partial of `field` at `point`.
/// Throws if any field evaluation is non-finite.
double fd_derivative(const std::function<double(const Point&)>& field,
                     const Point& point, const Stencil& stencil);

}  // namespace pidkl::diff
