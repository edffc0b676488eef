#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pidkl/kernel/kernel.hpp"
#include "pidkl/pretrain/tape_model.hpp"

namespace pidkl::pretrain {

struct LossWeights {
  double data = 1.0;
  double pde = 1.0;
  double gp = 1.0;

  void validate() const {
    if (data < 0 || pde < 0 || gp < 0)
      throw std::invalid_argument("loss weights must be non-negative");
    if (data == 0 && pde == 0 && gp == 0)
      throw std::invalid_argument("loss weights must not all be zero");
  }
};

struct AdamSettings {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct PretrainConfig {
  int n_col = 100;
  int n_iter = 2000;
  unsigned long long seed = 0;
  LossWeights weights;
  AdamSettings adam;
  std::vector<int> hidden = {32, 32};
  int latent_dim = 2;
  std::optional<Vec> phi_init;      // default: prior-box midpoint
  std::optional<Vec> psi_init_log;  // default: zeros (log space)
};

struct PretrainReport {
  nn::MlpParams theta_fix;
  nn::InputScaler scaler;
  kernel::KernelHyper psi_pre;
  Vec phi_pre;
  // One row per iteration: total, data, pde, gp.
  std::vector<std::array<double, 4>> trace;
  int iterations = 0;
  unsigned long long seed = 0;
};

/// Composite loss components at a given state (plain evaluation through the
/// same tape the optimizer uses).
struct LossBreakdown {
  double total = 0, data = 0, pde = 0, gp = 0;
};
LossBreakdown composite_loss(const gp::ObservationSet& obs,
                             const std::vector<Point>& collocation,
                             const pde::ProblemSpec& problem,
                             const nn::MlpParams& theta,
                             const nn::InputScaler& scaler,
                             const kernel::KernelHyper& psi, const Vec& phi,
                             const LossWeights& weights);

/// Stage 1: Adam on the flattened (theta, psi, logit-phi) vector against the
/// composite loss. Deterministic per seed.
PretrainReport run_pretraining(const pde::ProblemSpec& problem,
                               const gp::ObservationSet& obs,
                               const PretrainConfig& config);

/// Default input scaler for a problem (affine map of the domain onto [-1,1]).
nn::InputScaler domain_scaler(const Domain& domain);

}  // namespace pidkl::pretrain
