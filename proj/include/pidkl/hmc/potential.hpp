#pragma once

#include <list>
#include <memory>

#include "pidkl/gp/joint_model.hpp"
#include "pidkl/hmc/transform.hpp"

namespace pidkl::hmc {

/// Uniform box priors for phi; independent Gaussians in log space for psi,
/// centered at the pretraining estimate.
struct PriorSpec {
  Vec phi_lo;
  Vec phi_hi;
  Vec log_psi_center;  // length 1 + p: [log sf2, log len...]
  double log_psi_sd = 0.5;

  int n_phi() const { return static_cast<int>(phi_lo.size()); }
  int n_psi() const { return static_cast<int>(log_psi_center.size()); }
  int dim() const { return n_phi() + n_psi(); }
};

/// Target potential for a sampler over an unconstrained vector. value() must
/// be pure; gradient() defaults to central finite differences with step 1e-5
/// and one-sided fallback when a neighbor is non-finite.
class PotentialFn {
 public:
  virtual ~PotentialFn() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& zeta) const = 0;
  virtual Vec gradient(const Vec& zeta, int* one_sided_fallbacks) const;

  static constexpr double kFdStep = 1e-5;
  static constexpr int kMaxFdDim = 16;  // FD budget guard
};

/// Negative log of the unnormalized joint posterior over zeta = (logit phi,
/// log psi): joint NLML plus negative log-priors and the transform Jacobian.
/// Failed factorizations evaluate to +infinity, so proposals there are
/// rejected. Repeated evaluations at a shared lengthscale vector (the phi and
/// signal-variance legs of the FD gradient) reuse the base kernel blocks.
class ModelPotential : public PotentialFn {
 public:
  ModelPotential(const gp::ObservationSet& obs,
                 const kernel::FeatureMap& theta_fix,
                 const pde::LinearOperatorSpec& op,
                 const pde::StencilPolicy& policy, const PriorSpec& priors);

  int dim() const override { return priors_.dim(); }
  const ParamTransform& transform() const { return transform_; }
  const gp::JointModel& model() const { return model_; }
  const PriorSpec& priors() const { return priors_; }

  double value(const Vec& zeta) const override;
  Vec gradient(const Vec& zeta, int* one_sided_fallbacks) const override;

  Vec constrained(const Vec& zeta) const {
    return transform_.to_constrained(zeta);
  }
  Vec unconstrained(const Vec& xi) const {
    return transform_.to_unconstrained(xi);
  }

 private:
  struct BaseCache;  // small LRU keyed by the lengthscale vector
  double value_cached(const Vec& zeta, BaseCache& cache) const;

  gp::JointModel model_;
  PriorSpec priors_;
  ParamTransform transform_;
};

}  // namespace pidkl::hmc
