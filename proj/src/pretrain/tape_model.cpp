#include "pidkl/pretrain/tape_model.hpp"

#include <array>
#include <cmath>

namespace pidkl::pretrain {

namespace {

using diff::Tape;
using Index = Tape::Index;

constexpr double kLog2Pi = 1.8378770664093453;

struct Builder {
  Tape& tape;
  std::vector<Index> theta;
  Index log_sf2 = 0;
  std::vector<Index> log_len;
  std::vector<Index> phi;

  Index kappa(std::span<const Index> za, std::span<const Index> zb) {
    return tape.rbf(za, zb, log_sf2, log_len);
  }
};

std::vector<Index> feature_nodes(Builder& b, const nn::Architecture& arch,
                                 const nn::InputScaler& scaler,
                                 const Point& s) {
  const Point z = scaler.apply(s);
  std::vector<Index> in(z.size());
  for (Eigen::Index c = 0; c < z.size(); ++c) in[c] = b.tape.constant(z[c]);
  return nn::forward_on_tape(b.tape, arch, b.theta, in);
}

/// Affine-in-phi cluster weights as tape nodes.
std::vector<Index> weight_nodes(Builder& b,
                                const std::vector<gp::ClusterEntry>& cluster) {
  std::vector<Index> out;
  out.reserve(cluster.size());
  for (const auto& e : cluster) {
    std::vector<double> coeffs(e.w.size() - 1);
    for (std::size_t m = 0; m + 1 < static_cast<std::size_t>(e.w.size()); ++m)
      coeffs[m] = e.w[static_cast<Eigen::Index>(m) + 1];
    out.push_back(b.tape.affine(b.phi, coeffs, e.w[0]));
  }
  return out;
}

/// Forward substitution L z = d for constant d; returns the z nodes.
std::vector<Index> solve_lower(Builder& b, const std::vector<Index>& lpacked,
                               int n, const Vec& d) {
  std::vector<Index> z(n);
  for (int r = 0; r < n; ++r) {
    const Index* row = lpacked.data() + r * (r + 1) / 2;
    Index acc;
    if (r == 0) {
      acc = b.tape.constant(d[0]);
    } else {
      std::span<const Index> lrow(row, static_cast<std::size_t>(r));
      std::span<const Index> zprev(z.data(), static_cast<std::size_t>(r));
      const Index dot = b.tape.dot(lrow, zprev);
      const std::array<Index, 1> arg{dot};
      const std::array<double, 1> c{-1.0};
      acc = b.tape.affine(arg, c, d[r]);
    }
    z[r] = b.tape.div(acc, row[r]);
  }
  return z;
}

/// Back substitution L^T w = z for tape-valued z.
std::vector<Index> solve_upper(Builder& b, const std::vector<Index>& lpacked,
                               int n, const std::vector<Index>& z) {
  std::vector<Index> w(n);
  for (int r = n - 1; r >= 0; --r) {
    Index acc = z[r];
    if (r + 1 < n) {
      std::vector<Index> col, wgt;
      for (int c = r + 1; c < n; ++c) {
        col.push_back(lpacked[c * (c + 1) / 2 + r]);
        wgt.push_back(w[c]);
      }
      const Index dot = b.tape.dot(col, wgt);
      acc = b.tape.sub(z[r], dot);
    }
    w[r] = b.tape.div(acc, lpacked[r * (r + 1) / 2 + r]);
  }
  return w;
}

Index mean_of_squares(Builder& b, const std::vector<Index>& xs) {
  std::vector<Index> sq;
  sq.reserve(xs.size());
  for (Index x : xs) sq.push_back(b.tape.mul(x, x));
  std::vector<double> c(sq.size(), 1.0 / static_cast<double>(sq.size()));
  return b.tape.affine(sq, c, 0.0);
}

}  // namespace

CompositeLossTape build_composite_loss(const gp::ObservationSet& obs,
                                       const std::vector<Point>& collocation,
                                       const pde::ProblemSpec& problem,
                                       const TapeModelConfig& cfg) {
  obs.validate();
  cfg.arch.validate();
  const int n_u = obs.n_u();
  const int n_f = obs.n_f();
  const int n_phi = problem.n_phi();
  const int p = cfg.arch.output_dim();

  CompositeLossTape model;
  model.n_phi = n_phi;
  model.p = p;

  Tape& tape = model.tape;
  Builder b{tape};

  // Leaves: theta, log_sf2, log_len, zeta_phi.
  model.n_theta = [&] {
    int n = 0;
    for (int l = 0; l < cfg.arch.num_layers(); ++l)
      n += cfg.arch.widths[l + 1] * (cfg.arch.widths[l] + 1);
    return n;
  }();
  b.theta.resize(model.n_theta);
  for (int i = 0; i < model.n_theta; ++i) b.theta[i] = tape.leaf();
  b.log_sf2 = tape.leaf();
  b.log_len.resize(p);
  for (int k = 0; k < p; ++k) b.log_len[k] = tape.leaf();
  std::vector<Index> zeta(n_phi);
  for (int m = 0; m < n_phi; ++m) zeta[m] = tape.leaf();

  // phi = lo + (hi - lo) * sigmoid(zeta), strictly inside the prior box.
  b.phi.resize(n_phi);
  for (int m = 0; m < n_phi; ++m) {
    const Index s = tape.sigmoid(zeta[m]);
    const std::array<Index, 1> arg{s};
    const std::array<double, 1> c{problem.phi_hi[m] - problem.phi_lo[m]};
    b.phi[m] = tape.affine(arg, c, problem.phi_lo[m]);
  }
  model.phi_nodes.assign(b.phi.begin(), b.phi.end());

  // Features for every point the loss touches.
  std::vector<std::vector<Index>> zu(n_u);
  for (int i = 0; i < n_u; ++i)
    zu[i] = feature_nodes(b, cfg.arch, cfg.scaler, obs.s_u[i]);

  const gp::JointGeometry joint_geom = gp::build_joint_geometry(
      obs.s_u, obs.s_f, problem.op, cfg.kernel_policy, n_phi);
  std::vector<std::vector<Index>> zq(joint_geom.shift_points.size());
  for (std::size_t a = 0; a < zq.size(); ++a)
    zq[a] = feature_nodes(b, cfg.arch, cfg.scaler, joint_geom.shift_points[a]);

  const gp::JointGeometry col_geom = gp::build_joint_geometry(
      obs.s_u, collocation, problem.op, cfg.field_policy, n_phi);
  std::vector<std::vector<Index>> zc(col_geom.shift_points.size());
  for (std::size_t a = 0; a < zc.size(); ++a)
    zc[a] = feature_nodes(b, cfg.arch, cfg.scaler, col_geom.shift_points[a]);

  // K_uu and the conditioned surrogate weights w = (K_uu + tau_u^2 I)^-1 u.
  std::vector<std::vector<Index>> kuu(n_u, std::vector<Index>(n_u));
  std::vector<Index> kuu_packed;
  kuu_packed.reserve(n_u * (n_u + 1) / 2);
  for (int r = 0; r < n_u; ++r)
    for (int c = 0; c <= r; ++c) {
      const Index k = b.kappa(zu[r], zu[c]);
      kuu[r][c] = kuu[c][r] = k;
      kuu_packed.push_back(k);
    }
  const std::vector<Index> lu = tape.cholesky(kuu_packed, n_u, obs.tau_u_sq);
  const std::vector<Index> zu_solve = solve_lower(b, lu, n_u, obs.u);
  const std::vector<Index> w_cond = solve_upper(b, lu, n_u, zu_solve);

  // L_data: MSE of the surrogate mean at the u-observation points.
  std::vector<Index> resid_data(n_u);
  for (int i = 0; i < n_u; ++i) {
    const Index mu = tape.dot(kuu[i], w_cond);
    const std::array<Index, 1> arg{mu};
    const std::array<double, 1> c{-1.0};
    resid_data[i] = tape.affine(arg, c, obs.u[i]);
  }
  model.loss_data = mean_of_squares(b, resid_data);

  // L_PDE: operator residual of the surrogate at the collocation points.
  std::vector<Index> mu_at_shift(col_geom.shift_points.size());
  for (std::size_t a = 0; a < zc.size(); ++a) {
    std::vector<Index> kvec(n_u);
    for (int i = 0; i < n_u; ++i) kvec[i] = b.kappa(zc[a], zu[i]);
    mu_at_shift[a] = tape.dot(kvec, w_cond);
  }
  std::vector<Index> resid_pde(collocation.size());
  for (std::size_t j = 0; j < collocation.size(); ++j) {
    const auto& cluster = col_geom.clusters[j];
    const std::vector<Index> wts = weight_nodes(b, cluster);
    std::vector<Index> mus(cluster.size());
    for (std::size_t e = 0; e < cluster.size(); ++e)
      mus[e] = mu_at_shift[cluster[e].point_id];
    const Index a_mu = tape.dot(wts, mus);
    // Source, affine in phi.
    std::vector<double> sc(n_phi);
    for (int m = 0; m < n_phi; ++m)
      sc[m] = (m < static_cast<int>(problem.source.weights.size()) &&
               problem.source.weights[m])
                  ? problem.source.weights[m](collocation[j])
                  : 0.0;
    const double s0 =
        problem.source.base ? problem.source.base(collocation[j]) : 0.0;
    const Index src = tape.affine(b.phi, sc, s0);
    resid_pde[j] = tape.sub(a_mu, src);
  }
  model.loss_pde = collocation.empty() ? tape.constant(0.0)
                                       : mean_of_squares(b, resid_pde);

  // L_GP: joint NLML over (u, f) observations.
  const int n_tot = n_u + n_f;
  std::vector<std::vector<Index>> w_f(n_f);
  for (int j = 0; j < n_f; ++j) w_f[j] = weight_nodes(b, joint_geom.clusters[j]);

  std::vector<Index> joint_packed;
  joint_packed.reserve(n_tot * (n_tot + 1) / 2);
  const double taus[2] = {obs.tau_u_sq, obs.tau_f_sq};
  auto with_nugget = [&](Index k, int block) {
    const std::array<Index, 1> arg{k};
    const std::array<double, 1> c{1.0};
    return tape.affine(arg, c, taus[block]);
  };
  // Cache K_ff off-diagonal symmetry: entry (i,j) built once for i >= j.
  for (int r = 0; r < n_tot; ++r) {
    for (int c = 0; c <= r; ++c) {
      Index k;
      if (r < n_u) {
        k = kuu[r][c];
        if (r == c) k = with_nugget(k, 0);
      } else if (c < n_u) {
        const int j = r - n_u;  // K_fu(j, c) = sum_e w_e kappa(q_e, s_u_c)
        const auto& cluster = joint_geom.clusters[j];
        std::vector<Index> kvec(cluster.size());
        for (std::size_t e = 0; e < cluster.size(); ++e)
          kvec[e] = b.kappa(zq[cluster[e].point_id], zu[c]);
        k = tape.dot(w_f[j], kvec);
      } else {
        const int i = r - n_u;
        const int j = c - n_u;
        const auto& ci = joint_geom.clusters[i];
        const auto& cj = joint_geom.clusters[j];
        std::vector<Index> wa, wb, kab;
        wa.reserve(ci.size() * cj.size());
        wb.reserve(ci.size() * cj.size());
        kab.reserve(ci.size() * cj.size());
        for (std::size_t e = 0; e < ci.size(); ++e)
          for (std::size_t g = 0; g < cj.size(); ++g) {
            wa.push_back(w_f[i][e]);
            wb.push_back(w_f[j][g]);
            kab.push_back(
                b.kappa(zq[ci[e].point_id], zq[cj[g].point_id]));
          }
        k = tape.triple_dot(wa, wb, kab);
        if (i == j) k = with_nugget(k, 1);
      }
      joint_packed.push_back(k);
    }
  }
  const std::vector<Index> lj = tape.cholesky(joint_packed, n_tot, 0.0);
  const std::vector<Index> zj = solve_lower(b, lj, n_tot, obs.d_joint());
  const Index quad = tape.dot(zj, zj);
  std::vector<Index> log_diag(n_tot);
  for (int r = 0; r < n_tot; ++r)
    log_diag[r] = tape.log_(lj[r * (r + 1) / 2 + r]);
  std::vector<Index> gp_parts = {quad};
  std::vector<double> gp_coef = {0.5};
  for (Index ld : log_diag) {
    gp_parts.push_back(ld);
    gp_coef.push_back(1.0);  // 1/2 * logdet = sum log L_rr
  }
  model.loss_gp = tape.affine(gp_parts, gp_coef, 0.5 * n_tot * kLog2Pi);

  const std::array<Index, 3> parts{model.loss_data, model.loss_pde,
                                   model.loss_gp};
  const std::array<double, 3> wts{cfg.w_data, cfg.w_pde, cfg.w_gp};
  model.total = tape.affine(parts, wts, 0.0);
  tape.set_output(model.total);
  return model;
}

}  // namespace pidkl::pretrain
