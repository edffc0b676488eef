#pragma once

#include <vector>

#include "pidkl/diff/tape.hpp"
#include "pidkl/gp/joint_model.hpp"
#include "pidkl/nn/mlp.hpp"
#include "pidkl/pde/problems.hpp"

namespace pidkl::pretrain {

struct TapeModelConfig {
  nn::Architecture arch;
  nn::InputScaler scaler;
  pde::StencilPolicy field_policy;   // PDE-residual stencils on the surrogate
  pde::StencilPolicy kernel_policy;  // operator-kernel stencils in K_joint
  double w_data = 1.0;
  double w_pde = 1.0;
  double w_gp = 1.0;
};

/// The composite pretraining loss as a single tape. Leaf order is
/// [theta | log_sf2 | log_len (p) | zeta_phi (n_phi)], where zeta_phi is the
/// logit-space view of phi over its prior box. One forward/reverse pair per
/// optimizer step re-evaluates loss and gradient; the topology is fixed.
struct CompositeLossTape {
  diff::Tape tape;
  int n_theta = 0;
  int p = 0;
  int n_phi = 0;
  diff::Tape::Index total = 0;
  diff::Tape::Index loss_data = 0;
  diff::Tape::Index loss_pde = 0;
  diff::Tape::Index loss_gp = 0;
  std::vector<diff::Tape::Index> phi_nodes;  // constrained phi on the tape

  int dim() const { return n_theta + 1 + p + n_phi; }
};

CompositeLossTape build_composite_loss(const gp::ObservationSet& obs,
                                       const std::vector<Point>& collocation,
                                       const pde::ProblemSpec& problem,
                                       const TapeModelConfig& cfg);

}  // namespace pidkl::pretrain
