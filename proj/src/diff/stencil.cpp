#include "pidkl/diff/stencil.hpp"

#include <cmath>
#include <stdexcept>

namespace pidkl::diff {

int Stencil::max_offset() const {
  int m = 0;
  for (const auto& p : points)
    for (int s : p.shift) m = std::max(m, std::abs(s));
  return m;
}

void central_tableau_1d(int k, int accuracy, std::vector<int>& offsets,
                        std::vector<double>& weights) {
  if (accuracy != 2 && accuracy != 4)
    throw std::invalid_argument("central_tableau_1d: accuracy must be 2 or 4");
  switch (k) {
    case 0:
      offsets = {0};
      weights = {1.0};
      return;
    case 1:
      if (accuracy == 2) {
        offsets = {-1, 1};
        weights = {-0.5, 0.5};
      } else {
        offsets = {-2, -1, 1, 2};
        weights = {1.0 / 12.0, -2.0 / 3.0, 2.0 / 3.0, -1.0 / 12.0};
      }
      return;
    case 2:
      if (accuracy == 2) {
        offsets = {-1, 0, 1};
        weights = {1.0, -2.0, 1.0};
      } else {
        offsets = {-2, -1, 0, 1, 2};
        weights = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};
      }
      return;
    default:
      throw std::invalid_argument(
          "central_tableau_1d: unsupported derivative order " +
          std::to_string(k));
  }
}

Stencil make_stencil(const std::vector<int>& multi_index, const Vec& step,
                     int accuracy) {
  const int dim = static_cast<int>(multi_index.size());
  if (step.size() != dim)
    throw std::invalid_argument("make_stencil: step/multi_index size mismatch");
  for (int c = 0; c < dim; ++c) {
    if (multi_index[c] < 0)
      throw std::invalid_argument("make_stencil: negative derivative order");
    if (multi_index[c] > 0 && !(step[c] > 0.0))
      throw std::invalid_argument("make_stencil: step must be positive");
  }

  Stencil st;
  st.multi_index = multi_index;
  st.step = step;
  st.points = {{std::vector<int>(dim, 0), 1.0}};
  for (int c = 0; c < dim; ++c) {
    const int k = multi_index[c];
    if (k == 0) continue;
    std::vector<int> off;
    std::vector<double> w;
    central_tableau_1d(k, accuracy, off, w);
    const double scale = 1.0 / std::pow(step[c], k);
    std::vector<StencilPoint> next;
    next.reserve(st.points.size() * off.size());
    for (const auto& p : st.points)
      for (std::size_t j = 0; j < off.size(); ++j) {
        StencilPoint q = p;
        q.shift[c] = off[j];
        q.weight *= w[j] * scale;
        next.push_back(std::move(q));
      }
    st.points = std::move(next);
  }
  return st;
}

double fd_derivative(const std::function<double(const Point&)>& field,
                     const Point& point, const Stencil& stencil) {
  const int dim = static_cast<int>(stencil.multi_index.size());
  if (point.size() != dim)
    throw std::invalid_argument("fd_derivative: point dimension mismatch");
  double acc = 0.0;
  Point s(dim);
  for (const auto& sp : stencil.points) {
    for (int c = 0; c < dim; ++c)
      s[c] = point[c] + sp.shift[c] * stencil.step[c];
    const double v = field(s);
    if (!std::isfinite(v))
      throw std::runtime_error("fd_derivative: non-finite field evaluation");
    acc += sp.weight * v;
  }
  return acc;
}

}  // namespace pidkl::diff
