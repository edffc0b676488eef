#include "pidkl/gp/joint_model.hpp"

#include <cmath>
#include <map>

namespace pidkl::gp {

JointGeometry build_joint_geometry(const std::vector<Point>& u_points,
                                   const std::vector<Point>& f_points,
                                   const pde::LinearOperatorSpec& op,
                                   const pde::StencilPolicy& policy,
                                   int n_phi) {
  op.validate();
  JointGeometry g;
  g.u_points = u_points;
  g.f_points = f_points;
  g.n_phi = n_phi;
  g.clusters.resize(f_points.size());

  for (std::size_t j = 0; j < f_points.size(); ++j) {
    const Point& s = f_points[j];
    // Local dedup of shifted points by integer shift vector; steps are
    // per-coordinate and shared across terms at one point.
    std::map<std::vector<int>, int> local;  // shift -> index into shift_points
    std::map<int, Vec> weights;             // point_id -> affine weight
    for (const auto& term : op.terms) {
      const diff::Stencil st = pde::term_stencil(term, s, policy);
      Vec cw(1 + n_phi);
      cw[0] = term.coeff.base ? term.coeff.base(s) : 0.0;
      for (int m = 0; m < n_phi; ++m)
        cw[1 + m] = (m < static_cast<int>(term.coeff.weights.size()) &&
                     term.coeff.weights[m])
                        ? term.coeff.weights[m](s)
                        : 0.0;
      for (const auto& sp : st.points) {
        auto it = local.find(sp.shift);
        int pid;
        if (it == local.end()) {
          Point q = s;
          for (int c = 0; c < st.step.size(); ++c)
            q[c] += sp.shift[c] * st.step[c];
          pid = static_cast<int>(g.shift_points.size());
          g.shift_points.push_back(q);
          local.emplace(sp.shift, pid);
        } else {
          pid = it->second;
        }
        auto [wit, fresh] = weights.try_emplace(pid, Vec::Zero(1 + n_phi));
        wit->second += sp.weight * cw;
      }
    }
    for (auto& [pid, w] : weights)
      g.clusters[j].push_back(ClusterEntry{pid, std::move(w)});
  }
  return g;
}

JointModel::JointModel(const ObservationSet& obs,
                       const kernel::FeatureMap& theta,
                       const pde::LinearOperatorSpec& op,
                       const pde::StencilPolicy& policy, int n_phi)
    : geom_(build_joint_geometry(obs.s_u, obs.s_f, op, policy, n_phi)),
      theta_(&theta),
      tau_u_sq_(obs.tau_u_sq),
      tau_f_sq_(obs.tau_f_sq),
      u_obs_(obs.u),
      f_obs_(obs.f) {
  obs.validate();
  zu_ = feature_matrix(geom_.u_points);
  zs_ = feature_matrix(geom_.shift_points);
}

Mat JointModel::feature_matrix(const std::vector<Point>& pts) const {
  if (pts.empty()) return Mat(0, 0);
  const Vec z0 = (*theta_)(pts[0]);
  Mat z(pts.size(), z0.size());
  z.row(0) = z0.transpose();
  for (std::size_t i = 1; i < pts.size(); ++i)
    z.row(static_cast<Eigen::Index>(i)) = (*theta_)(pts[i]).transpose();
  return z;
}

Mat JointModel::exp_block(const Mat& za, const Mat& zb,
                          const Vec& inv_len_sq) const {
  const Eigen::Index na = za.rows();
  const Eigen::Index nb = zb.rows();
  if (na == 0 || nb == 0) return Mat(na, nb);
  const int p = static_cast<int>(za.cols());
  // Accumulate d*d*inv_l2 per latent dimension in the same order as
  // base_rbf, so the two evaluation routes agree to round-off. Raw column
  // pointers plus one vectorized exp pass keep this on the fast path; it is
  // the single hottest kernel of the sampler.
  Mat q(na, nb);
  const double* zap[8];
  const double* zbp[8];
  if (p > 8) throw std::invalid_argument("exp_block: latent dimension > 8");
  for (int k = 0; k < p; ++k) {
    zap[k] = za.col(k).data();
    zbp[k] = zb.col(k).data();
  }
  for (Eigen::Index j = 0; j < nb; ++j) {
    double* col = q.col(j).data();
    if (p == 2) {
      const double b0 = zbp[0][j], b1 = zbp[1][j];
      for (Eigen::Index i = 0; i < na; ++i) {
        const double d0 = zap[0][i] - b0;
        const double d1 = zap[1][i] - b1;
        col[i] = d0 * d0 * inv_len_sq[0] + d1 * d1 * inv_len_sq[1];
      }
    } else {
      for (Eigen::Index i = 0; i < na; ++i) {
        double acc = 0.0;
        for (int k = 0; k < p; ++k) {
          const double d = zap[k][i] - zbp[k][j];
          acc += d * d * inv_len_sq[k];
        }
        col[i] = acc;
      }
    }
  }
  q = (-0.5 * q.array()).exp();
  return q;
}

BaseBlocks JointModel::base_blocks(const Vec& log_len) const {
  const Vec inv_len_sq = (-2.0 * log_len.array()).exp().matrix();
  BaseBlocks b;
  b.uu = exp_block(zu_, zu_, inv_len_sq);
  b.us = exp_block(zu_, zs_, inv_len_sq);
  b.ss = exp_block(zs_, zs_, inv_len_sq);
  return b;
}

JointModel::WeightTable JointModel::weight_table(const Vec& phi) const {
  WeightTable w;
  w.offsets.resize(n_f() + 1);
  w.offsets[0] = 0;
  std::size_t total = 0;
  for (int j = 0; j < n_f(); ++j) {
    total += geom_.clusters[j].size();
    w.offsets[j + 1] = static_cast<int>(total);
  }
  w.cols.resize(total);
  w.values = Vec(total);
  std::size_t t = 0;
  for (int j = 0; j < n_f(); ++j)
    for (const auto& e : geom_.clusters[j]) {
      double v = e.w[0];
      for (int m = 0; m < geom_.n_phi; ++m) v += e.w[1 + m] * phi[m];
      w.cols[t] = e.point_id;
      w.values[static_cast<Eigen::Index>(t)] = v;
      ++t;
    }
  return w;
}

Mat JointModel::apply_w_right(const Mat& b, const WeightTable& w) const {
  Mat out = Mat::Zero(b.rows(), n_f());
  for (int j = 0; j < n_f(); ++j) {
    auto col = out.col(j);
    for (int e = w.offsets[j]; e < w.offsets[j + 1]; ++e)
      col.noalias() += w.values[e] * b.col(w.cols[e]);
  }
  return out;
}

Mat JointModel::apply_w_left(const Mat& t, const WeightTable& w) const {
  Mat out = Mat::Zero(n_f(), t.cols());
  for (int i = 0; i < n_f(); ++i) {
    auto row = out.row(i);
    for (int e = w.offsets[i]; e < w.offsets[i + 1]; ++e)
      row.noalias() += w.values[e] * t.row(w.cols[e]);
  }
  return out;
}

JointBlocks JointModel::assemble_from(const BaseBlocks& base, double sf2,
                                      const Vec& phi) const {
  const WeightTable w = weight_table(phi);
  JointBlocks blk;
  blk.kuu = sf2 * base.uu;
  blk.kuf = sf2 * apply_w_right(base.us, w);
  const Mat t = apply_w_right(base.ss, w);  // n_shift x n_f
  blk.kff = sf2 * apply_w_left(t, w);
  // The double stencil application is symmetric up to round-off.
  blk.kff = 0.5 * (blk.kff + blk.kff.transpose()).eval();
  return blk;
}

JointBlocks JointModel::assemble(const kernel::KernelHyper& hyper,
                                 const Vec& phi) const {
  return assemble_from(base_blocks(hyper.log_len), hyper.sf2(), phi);
}

Mat JointModel::joint_matrix(const JointBlocks& blocks) const {
  const int nu = n_u();
  const int nf = n_f();
  Mat m(nu + nf, nu + nf);
  m.topLeftCorner(nu, nu) = blocks.kuu;
  m.topRightCorner(nu, nf) = blocks.kuf;
  m.bottomLeftCorner(nf, nu) = blocks.kuf.transpose();
  m.bottomRightCorner(nf, nf) = blocks.kff;
  m.diagonal().head(nu).array() += tau_u_sq_;
  m.diagonal().tail(nf).array() += tau_f_sq_;
  return m;
}

double JointModel::nlml_from(const BaseBlocks& base,
                             const kernel::KernelHyper& hyper,
                             const Vec& phi) const {
  const Mat m = joint_matrix(assemble_from(base, hyper.sf2(), phi));
  const CholFactor chol = chol_jitter(m, 0.0);
  Vec d(n_u() + n_f());
  d.head(n_u()) = u_obs_;
  d.tail(n_f()) = f_obs_;
  const Vec z = chol.solve_lower(d);
  const double n_total = n_u() + n_f();
  return 0.5 * z.squaredNorm() + 0.5 * chol.log_det() +
         0.5 * n_total * std::log(2.0 * M_PI);
}

double JointModel::nlml(const kernel::KernelHyper& hyper,
                        const Vec& phi) const {
  return nlml_from(base_blocks(hyper.log_len), hyper, phi);
}

DecomposedLoglik JointModel::decomposed(const kernel::KernelHyper& hyper,
                                        const Vec& phi) const {
  const JointBlocks blk = assemble(hyper, phi);
  const int nu = n_u();
  const int nf = n_f();

  Mat a = blk.kuu;
  a.diagonal().array() += tau_u_sq_;
  const CholFactor chol_a = chol_jitter(a, 0.0);

  DecomposedLoglik out;
  const Vec au = chol_a.solve(u_obs_);
  out.constant = -0.5 * u_obs_.dot(au) - 0.5 * chol_a.log_det() -
                 0.5 * (nu + nf) * std::log(2.0 * M_PI);

  if (nf == 0) return out;  // h and the Schur block degenerate away

  const Vec h = blk.kuf.transpose() * au;
  Mat schur = blk.kff;
  schur.diagonal().array() += tau_f_sq_;
  schur -= blk.kuf.transpose() * chol_a.solve(blk.kuf);
  schur = 0.5 * (schur + schur.transpose()).eval();
  const CholFactor chol_s = chol_jitter(schur, 0.0);

  out.fidelity = chol_s.solve_lower(Vec(f_obs_ - h)).squaredNorm();
  out.complexity = chol_s.log_det();
  return out;
}

JointModel::Prediction JointModel::predict(
    const kernel::KernelHyper& hyper, const Vec& phi,
    const std::vector<Point>& test_points) const {
  const double sf2 = hyper.sf2();
  const Vec inv_len_sq = (-2.0 * hyper.log_len.array()).exp().matrix();
  const Mat zt = feature_matrix(test_points);

  const Mat m = joint_matrix(assemble(hyper, phi));
  const CholFactor chol = chol_jitter(m, 0.0);

  const int nt = static_cast<int>(test_points.size());
  Mat cross(nt, n_u() + n_f());
  cross.leftCols(n_u()) = sf2 * exp_block(zt, zu_, inv_len_sq);
  cross.rightCols(n_f()) =
      sf2 * apply_w_right(exp_block(zt, zs_, inv_len_sq), weight_table(phi));

  Vec d(n_u() + n_f());
  d.head(n_u()) = u_obs_;
  d.tail(n_f()) = f_obs_;

  Prediction pred;
  pred.mean = cross * chol.solve(d);
  const Mat v = chol.solve_lower(Mat(cross.transpose()));
  pred.cov = sf2 * exp_block(zt, zt, inv_len_sq) - v.transpose() * v;
  pred.cov = 0.5 * (pred.cov + pred.cov.transpose()).eval();
  return pred;
}

double joint_nlml(const ObservationSet& obs, const kernel::FeatureMap& theta,
                  const kernel::KernelHyper& hyper, const Vec& phi,
                  const pde::LinearOperatorSpec& op,
                  const pde::StencilPolicy& policy) {
  obs.validate();
  return JointModel(obs, theta, op, policy, static_cast<int>(phi.size()))
      .nlml(hyper, phi);
}

DecomposedLoglik decomposed_loglik(const ObservationSet& obs,
                                   const kernel::FeatureMap& theta,
                                   const kernel::KernelHyper& hyper,
                                   const Vec& phi,
                                   const pde::LinearOperatorSpec& op,
                                   const pde::StencilPolicy& policy) {
  obs.validate();
  return JointModel(obs, theta, op, policy, static_cast<int>(phi.size()))
      .decomposed(hyper, phi);
}

}  // namespace pidkl::gp
