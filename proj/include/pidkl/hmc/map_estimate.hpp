#pragma once

#include "pidkl/gp/joint_model.hpp"

namespace pidkl::hmc {

struct MapResult {
  Vec phi_map;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct MapSettings {
  int max_iter = 500;
  double grad_tol = 1e-3;  // relative to max(1, |objective|)
  double initial_step = 0.05;
  double fd_step = 1e-3;
};

/// MAP estimate of phi with psi fixed and a Gaussian prior N(phi_pre,
/// sigma_prior): minimizes fidelity - log|R_ff| + ||phi - phi_pre||^2 in the
/// prior metric by gradient descent with central-difference gradients of the
/// decomposed likelihood. Returns the best iterate found, flagged if the
/// gradient tolerance was not reached.
MapResult map_estimate(const gp::ObservationSet& obs,
                       const kernel::FeatureMap& theta_fix,
                       const kernel::KernelHyper& psi_fix, const Vec& phi_pre,
                       const Mat& sigma_prior,
                       const pde::LinearOperatorSpec& op,
                       const pde::StencilPolicy& policy,
                       const MapSettings& settings = {});

}  // namespace pidkl::hmc
