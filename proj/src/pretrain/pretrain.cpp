#include "pidkl/pretrain/pretrain.hpp"

#include <cmath>

#include "pidkl/hmc/transform.hpp"

namespace pidkl::pretrain {

nn::InputScaler domain_scaler(const Domain& domain) {
  nn::InputScaler s;
  s.lo = Vec(domain.dim());
  s.hi = Vec(domain.dim());
  for (int c = 0; c < domain.dim(); ++c) {
    s.lo[c] = domain.lo(c);
    s.hi[c] = domain.hi(c);
  }
  return s;
}

namespace {

TapeModelConfig tape_config(const pde::ProblemSpec& problem,
                            const nn::Architecture& arch,
                            const LossWeights& weights) {
  TapeModelConfig cfg;
  cfg.arch = arch;
  cfg.scaler = domain_scaler(problem.domain);
  cfg.field_policy = pde::StencilPolicy::for_fields(problem.domain);
  cfg.kernel_policy = pde::StencilPolicy::for_kernels(problem.domain);
  cfg.w_data = weights.data;
  cfg.w_pde = weights.pde;
  cfg.w_gp = weights.gp;
  return cfg;
}

nn::Architecture make_arch(const pde::ProblemSpec& problem,
                           const PretrainConfig& config) {
  nn::Architecture arch;
  arch.widths.push_back(problem.domain.dim());
  for (int h : config.hidden) arch.widths.push_back(h);
  arch.widths.push_back(config.latent_dim);
  arch.validate();
  return arch;
}

}  // namespace

LossBreakdown composite_loss(const gp::ObservationSet& obs,
                             const std::vector<Point>& collocation,
                             const pde::ProblemSpec& problem,
                             const nn::MlpParams& theta,
                             const nn::InputScaler& scaler,
                             const kernel::KernelHyper& psi, const Vec& phi,
                             const LossWeights& weights) {
  weights.validate();
  TapeModelConfig cfg;
  cfg.arch = theta.arch;
  cfg.scaler = scaler;
  cfg.field_policy = pde::StencilPolicy::for_fields(problem.domain);
  cfg.kernel_policy = pde::StencilPolicy::for_kernels(problem.domain);
  cfg.w_data = weights.data;
  cfg.w_pde = weights.pde;
  cfg.w_gp = weights.gp;
  CompositeLossTape model = build_composite_loss(obs, collocation, problem, cfg);

  const hmc::ParamTransform phi_map =
      hmc::ParamTransform::box(problem.phi_lo, problem.phi_hi);
  const Vec zeta = phi_map.to_unconstrained(phi);

  std::vector<double> seeds;
  const Vec th = theta.flatten();
  seeds.reserve(model.dim());
  for (int i = 0; i < th.size(); ++i) seeds.push_back(th[i]);
  seeds.push_back(psi.log_sf2);
  for (int k = 0; k < psi.log_len.size(); ++k) seeds.push_back(psi.log_len[k]);
  for (int m = 0; m < zeta.size(); ++m) seeds.push_back(zeta[m]);

  LossBreakdown out;
  out.total = model.tape.forward(seeds);
  out.data = model.tape.value(model.loss_data);
  out.pde = model.tape.value(model.loss_pde);
  out.gp = model.tape.value(model.loss_gp);
  return out;
}

PretrainReport run_pretraining(const pde::ProblemSpec& problem,
                               const gp::ObservationSet& obs,
                               const PretrainConfig& config) {
  config.weights.validate();
  if (config.n_iter < 0)
    throw std::invalid_argument("pretrain: n_iter must be >= 0");
  const nn::Architecture arch = make_arch(problem, config);
  const std::vector<Point> col =
      pde::sample_interior(problem.domain, config.n_col, config.seed);

  CompositeLossTape model = build_composite_loss(
      obs, col, problem, tape_config(problem, arch, config.weights));

  const int p = config.latent_dim;
  const int n_phi = problem.n_phi();
  const hmc::ParamTransform phi_map =
      hmc::ParamTransform::box(problem.phi_lo, problem.phi_hi);

  // Initial point: Xavier theta, zero log-hypers, prior-midpoint phi.
  const nn::MlpParams theta0 = nn::init(arch, config.seed + 1);
  const Vec th0 = theta0.flatten();
  Vec x(model.dim());
  for (int i = 0; i < th0.size(); ++i) x[i] = th0[i];
  x[model.n_theta] = 0.0;
  for (int k = 0; k < p; ++k) x[model.n_theta + 1 + k] = 0.0;
  if (config.psi_init_log) {
    const Vec& pi = *config.psi_init_log;
    if (pi.size() != p + 1)
      throw std::invalid_argument("pretrain: psi_init_log size mismatch");
    for (int k = 0; k < p + 1; ++k) x[model.n_theta + k] = pi[k];
  }
  Vec phi0 = 0.5 * (problem.phi_lo + problem.phi_hi);
  if (config.phi_init) {
    if (config.phi_init->size() != n_phi)
      throw std::invalid_argument("pretrain: phi_init size mismatch");
    phi0 = *config.phi_init;
  }
  const Vec zeta0 = phi_map.to_unconstrained(phi0);
  for (int m = 0; m < n_phi; ++m) x[model.n_theta + 1 + p + m] = zeta0[m];

  PretrainReport report;
  report.seed = config.seed;
  report.scaler = domain_scaler(problem.domain);
  report.trace.reserve(config.n_iter);

  Vec m_adam = Vec::Zero(model.dim());
  Vec v_adam = Vec::Zero(model.dim());
  std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  for (int it = 0; it < config.n_iter; ++it) {
    double total;
    try {
      total = model.tape.forward(xs);
    } catch (const std::exception& e) {
      throw std::runtime_error(
          "pretrain: non-finite loss at iteration " + std::to_string(it) +
          " (" + e.what() + "); trace has " +
          std::to_string(report.trace.size()) + " entries");
    }
    report.trace.push_back({total, model.tape.value(model.loss_data),
                            model.tape.value(model.loss_pde),
                            model.tape.value(model.loss_gp)});
    const std::vector<double> grad = model.tape.reverse();

    const double b1t = 1.0 - std::pow(config.adam.beta1, it + 1);
    const double b2t = 1.0 - std::pow(config.adam.beta2, it + 1);
    for (int i = 0; i < model.dim(); ++i) {
      m_adam[i] = config.adam.beta1 * m_adam[i] +
                  (1.0 - config.adam.beta1) * grad[i];
      v_adam[i] = config.adam.beta2 * v_adam[i] +
                  (1.0 - config.adam.beta2) * grad[i] * grad[i];
      x[i] -= config.adam.lr * (m_adam[i] / b1t) /
              (std::sqrt(v_adam[i] / b2t) + config.adam.eps);
    }
  }

  report.iterations = config.n_iter;
  Vec th_final(model.n_theta);
  for (int i = 0; i < model.n_theta; ++i) th_final[i] = x[i];
  report.theta_fix = nn::MlpParams::unflatten(arch, th_final);
  report.psi_pre.log_sf2 = x[model.n_theta];
  report.psi_pre.log_len = x.segment(model.n_theta + 1, p);
  Vec zeta_final = x.tail(n_phi);
  report.phi_pre = phi_map.to_constrained(zeta_final);
  if (!report.phi_pre.allFinite())
    throw std::runtime_error("pretrain: non-finite phi_pre");
  return report;
}

}  // namespace pidkl::pretrain
