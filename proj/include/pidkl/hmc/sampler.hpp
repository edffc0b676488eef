#pragma once

#include <string>
#include <vector>

#include "pidkl/hmc/potential.hpp"

namespace pidkl::hmc {

struct HmcConfig {
  int n_warmup = 1500;
  int n_samples = 8500;
  int leapfrog_steps = 20;
  double step_size0 = 0.1;
  double target_accept = 0.8;
  Vec mass;  // diagonal mass; empty means identity
  unsigned long long seed = 0;

  void validate() const;
};

struct SampleChain {
  Mat draws;  // n_samples x dim, constrained space
  std::vector<std::string> names;
  double accept_rate = 0.0;   // post-warmup
  double warmup_accept = 0.0;
  double adapted_step = 0.0;
  Vec potential;              // U at each recorded draw
  Vec ess;                    // per column
  int one_sided_fallbacks = 0;
  unsigned long long seed = 0;

  int n_draws() const { return static_cast<int>(draws.rows()); }
  int dim() const { return static_cast<int>(draws.cols()); }
};

/// One leapfrog trajectory: half momentum kick, L position drifts with
/// interleaved kicks, final half kick. Returns false if the state went
/// non-finite (caller rejects the proposal).
bool leapfrog(const PotentialFn& target, Vec& zeta, Vec& momentum, double eps,
              int steps, const Vec& inv_mass, int* one_sided_fallbacks);

/// Raw HMC over an unconstrained potential. Draws stay unconstrained;
/// step size adapts by dual averaging toward target_accept during warmup and
/// is frozen afterwards. Throws if the warmup acceptance rate drops
/// below 0.05.
SampleChain sample(const PotentialFn& target, const Vec& zeta0,
                   const HmcConfig& config);

/// Stage 2 entry point: samples (phi, psi) given fixed network parameters,
/// starting from the pretraining estimates. Draws are reported in
/// constrained space with named columns.
SampleChain run_hmc(const gp::ObservationSet& obs,
                    const kernel::FeatureMap& theta_fix,
                    const kernel::KernelHyper& psi_pre, const Vec& phi_pre,
                    const PriorSpec& priors, const pde::LinearOperatorSpec& op,
                    const pde::StencilPolicy& policy,
                    const std::vector<std::string>& phi_names,
                    const HmcConfig& config);

}  // namespace pidkl::hmc
