#pragma once

#include <vector>

#include "pidkl/gp/cholesky.hpp"
#include "pidkl/gp/observation_set.hpp"
#include "pidkl/kernel/kernel.hpp"
#include "pidkl/pde/operator.hpp"
#include "pidkl/types.hpp"

namespace pidkl::gp {

/// One stencil-cluster entry of an f-observation row: index into the unique
/// shifted-point list plus the affine weight w(phi) = w[0] + sum_m w[1+m]*phi_m
/// (stencil weight times the operator coefficient at that row's point).
struct ClusterEntry {
  int point_id = 0;
  Vec w;
};

/// Discretized operator geometry for a fixed observation layout: unique
/// shifted evaluation points and, per f-point, its weighted cluster.
/// Fixed once theta is fixed, so repeated likelihood evaluations only redo
/// the base-kernel blocks and the sparse weight application.
struct JointGeometry {
  std::vector<Point> u_points;
  std::vector<Point> f_points;
  std::vector<Point> shift_points;
  std::vector<std::vector<ClusterEntry>> clusters;
  int n_phi = 0;
};

JointGeometry build_joint_geometry(const std::vector<Point>& u_points,
                                   const std::vector<Point>& f_points,
                                   const pde::LinearOperatorSpec& op,
                                   const pde::StencilPolicy& policy,
                                   int n_phi);

/// exp(-1/2 ||ztilde_a - ztilde_b||^2) blocks between the stored feature
/// sets; the signal variance enters later as a scalar factor.
struct BaseBlocks {
  Mat uu;  // n_u x n_u
  Mat us;  // n_u x n_shift
  Mat ss;  // n_shift x n_shift
};

struct JointBlocks {
  Mat kuu;
  Mat kuf;
  Mat kff;
};

struct DecomposedLoglik {
  double fidelity = 0.0;    // ||f - h(phi)||^2 in the R_ff norm
  double complexity = 0.0;  // -log |R_ff| = log |Schur complement|
  double constant = 0.0;    // C, independent of phi

  double loglik() const { return -0.5 * (fidelity + complexity) + constant; }
};

/// Joint GP over (u, f) observations with the operator applied through
/// fixed stencil clusters. Assembles K_joint blocks, the joint NLML, and
/// the appendix decomposition for a given (psi, phi).
class JointModel {
 public:
  JointModel(const ObservationSet& obs, const kernel::FeatureMap& theta,
             const pde::LinearOperatorSpec& op,
             const pde::StencilPolicy& policy, int n_phi);

  const JointGeometry& geometry() const { return geom_; }
  int n_u() const { return static_cast<int>(geom_.u_points.size()); }
  int n_f() const { return static_cast<int>(geom_.f_points.size()); }

  BaseBlocks base_blocks(const Vec& log_len) const;
  JointBlocks assemble_from(const BaseBlocks& base, double sf2,
                            const Vec& phi) const;
  JointBlocks assemble(const kernel::KernelHyper& hyper, const Vec& phi) const;

  Mat joint_matrix(const JointBlocks& blocks) const;  // with nuggets added

  double nlml(const kernel::KernelHyper& hyper, const Vec& phi) const;
  double nlml_from(const BaseBlocks& base, const kernel::KernelHyper& hyper,
                   const Vec& phi) const;
  DecomposedLoglik decomposed(const kernel::KernelHyper& hyper,
                              const Vec& phi) const;

  /// Conditional predictive distribution of u at test points given the full
  /// joint observation vector.
  struct Prediction {
    Vec mean;
    Mat cov;
  };
  Prediction predict(const kernel::KernelHyper& hyper, const Vec& phi,
                     const std::vector<Point>& test_points) const;

 private:
  Mat feature_matrix(const std::vector<Point>& pts) const;
  Mat exp_block(const Mat& za, const Mat& zb, const Vec& inv_len_sq) const;

  // Flat per-row stencil weights at a given phi (one slice per f-point).
  struct WeightTable {
    std::vector<int> offsets;  // n_f + 1
    std::vector<int> cols;     // shift-point ids, flattened
    Vec values;
  };
  WeightTable weight_table(const Vec& phi) const;
  Mat apply_w_right(const Mat& b, const WeightTable& w) const;  // B W^T
  Mat apply_w_left(const Mat& t, const WeightTable& w) const;   // W T

  JointGeometry geom_;
  const kernel::FeatureMap* theta_;
  double tau_u_sq_;
  double tau_f_sq_;
  Vec u_obs_;
  Vec f_obs_;
  Mat zu_;  // n_u x p features
  Mat zs_;  // n_shift x p features
};

/// Joint NLML of the (u, f) observations (reference entry point).
double joint_nlml(const ObservationSet& obs, const kernel::FeatureMap& theta,
                  const kernel::KernelHyper& hyper, const Vec& phi,
                  const pde::LinearOperatorSpec& op,
                  const pde::StencilPolicy& policy);

/// Appendix decomposition of the same log-likelihood; the two paths agree
/// up to factorization round-off.
DecomposedLoglik decomposed_loglik(const ObservationSet& obs,
                                   const kernel::FeatureMap& theta,
                                   const kernel::KernelHyper& hyper,
                                   const Vec& phi,
                                   const pde::LinearOperatorSpec& op,
                                   const pde::StencilPolicy& policy);

}  // namespace pidkl::gp
