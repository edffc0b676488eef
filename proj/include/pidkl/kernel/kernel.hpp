#pragma once

#include <optional>

#include "pidkl/nn/mlp.hpp"
#include "pidkl/pde/operator.hpp"
#include "pidkl/types.hpp"

namespace pidkl::kernel {

/// ARD-RBF hyperparameters in log space; exponentiation keeps the
/// constrained values strictly positive.
struct KernelHyper {
  double log_sf2 = 0.0;
  Vec log_len;

  double sf2() const { return std::exp(log_sf2); }
  Vec len() const { return log_len.array().exp().matrix(); }
  int p() const { return static_cast<int>(log_len.size()); }

  Vec pack() const;
  static KernelHyper unpack(const Vec& v);
};

/// Which kernel argument(s) the PDE operator acts on.
enum class OperatorTag { kNone, kLeft, kRight, kBoth };

/// Feature map of the deep kernel: affine input rescale followed by the
/// network, or the raw coordinates when `identity` is set (the analytic
/// oracle path).
struct FeatureMap {
  bool identity = false;
  nn::InputScaler scaler;
  nn::MlpParams net;

  int output_dim(int input_dim) const {
    return identity ? input_dim : net.arch.output_dim();
  }
  Vec operator()(const Point& s) const {
    return identity ? s : nn::forward(net, scaler.apply(s));
  }
};

enum class OperatorKernelBackend { kStencil, kAnalytic };

/// sf2 * exp(-1/2 sum_k (z_k - z'_k)^2 / l_k^2)
double base_rbf(const Vec& z, const Vec& zp, const KernelHyper& hyper);

double deep_kernel(const Point& s, const Point& sp, const FeatureMap& theta,
                   const KernelHyper& hyper);

/// Operator-transformed deep kernel value: A_s kappa, A_s' kappa,
/// A_s A_s' kappa, or plain kappa depending on the tag. The stencil backend
/// differences the deep kernel under `policy`; the analytic backend requires
/// the identity feature map and per-coordinate orders <= 2 per argument.
double operator_kernel(const Point& s, const Point& sp, const FeatureMap& theta,
                       const KernelHyper& hyper, const Vec& phi,
                       const pde::LinearOperatorSpec& op, OperatorTag tag,
                       OperatorKernelBackend backend,
                       const pde::StencilPolicy& policy);

/// One side of a Gram block: points plus whether the operator acts on them.
struct GramSide {
  const std::vector<Point>* points = nullptr;
  bool with_operator = false;
};

/// Entrywise operator_kernel over rows x cols.
Mat gram(const GramSide& rows, const GramSide& cols, const FeatureMap& theta,
         const KernelHyper& hyper, const Vec& phi,
         const pde::LinearOperatorSpec& op, OperatorKernelBackend backend,
         const pde::StencilPolicy& policy);

/// d^n/dd^n exp(-d^2 / (2 l^2)) for n <= 4 (the analytic-backend primitive).
double gaussian_derivative_1d(int n, double d, double len);

}  // namespace pidkl::kernel
