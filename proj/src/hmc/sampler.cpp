#include "pidkl/hmc/sampler.hpp"

#include <cmath>
#include <random>

#include "pidkl/hmc/diagnostics.hpp"

namespace pidkl::hmc {

void HmcConfig::validate() const {
  if (n_warmup < 0 || n_samples < 1)
    throw std::invalid_argument("hmc: warmup/sample counts must be positive");
  if (leapfrog_steps < 1 || !(step_size0 > 0.0))
    throw std::invalid_argument("hmc: leapfrog settings must be positive");
  if (!(target_accept > 0.4 && target_accept < 0.99))
    throw std::invalid_argument("hmc: target acceptance must be in (0.4, 0.99)");
}

bool leapfrog(const PotentialFn& target, Vec& zeta, Vec& momentum, double eps,
              int steps, const Vec& inv_mass, int* one_sided_fallbacks) {
  momentum -= 0.5 * eps * target.gradient(zeta, one_sided_fallbacks);
  if (!momentum.allFinite()) return false;
  for (int l = 1; l <= steps; ++l) {
    zeta += eps * inv_mass.cwiseProduct(momentum);
    if (!zeta.allFinite()) return false;
    if (l < steps) {
      momentum -= eps * target.gradient(zeta, one_sided_fallbacks);
      if (!momentum.allFinite()) return false;
    }
  }
  momentum -= 0.5 * eps * target.gradient(zeta, one_sided_fallbacks);
  return momentum.allFinite();
}

SampleChain sample(const PotentialFn& target, const Vec& zeta0,
                   const HmcConfig& config) {
  config.validate();
  const int dim = target.dim();
  if (zeta0.size() != dim)
    throw std::invalid_argument("hmc: initial point dimension mismatch");

  Vec mass = config.mass;
  if (mass.size() == 0) mass = Vec::Ones(dim);
  if (mass.size() != dim || !(mass.array() > 0.0).all())
    throw std::invalid_argument("hmc: mass must be positive with matching dim");
  const Vec inv_mass = mass.cwiseInverse();
  const Vec mass_sqrt = mass.cwiseSqrt();

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Dual averaging (target_accept as the setpoint), frozen after warmup.
  const double mu = std::log(10.0 * config.step_size0);
  double log_eps = std::log(config.step_size0);
  double log_eps_bar = 0.0;
  double h_bar = 0.0;
  constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;

  Vec zeta = zeta0;
  double u_curr = target.value(zeta);
  if (!std::isfinite(u_curr))
    throw std::invalid_argument("hmc: potential not finite at the start point");

  SampleChain chain;
  chain.seed = config.seed;
  chain.draws = Mat(config.n_samples, dim);
  chain.potential = Vec(config.n_samples);

  int accepted_post = 0;
  int accepted_warm = 0;
  const int total = config.n_warmup + config.n_samples;
  for (int it = 1; it <= total; ++it) {
    const bool warm = it <= config.n_warmup;
    const double eps = warm ? std::exp(log_eps) : chain.adapted_step;

    Vec p(dim);
    for (int i = 0; i < dim; ++i) p[i] = mass_sqrt[i] * normal(rng);
    const double h_curr = u_curr + 0.5 * p.dot(inv_mass.cwiseProduct(p));

    Vec z_prop = zeta;
    Vec p_prop = p;
    double alpha = 0.0;
    double u_prop = std::numeric_limits<double>::infinity();
    if (leapfrog(target, z_prop, p_prop, eps, config.leapfrog_steps, inv_mass,
                 &chain.one_sided_fallbacks)) {
      u_prop = target.value(z_prop);
      const double h_prop =
          u_prop + 0.5 * p_prop.dot(inv_mass.cwiseProduct(p_prop));
      if (std::isfinite(h_prop))
        alpha = std::min(1.0, std::exp(h_curr - h_prop));
    }
    if (unif(rng) < alpha) {
      zeta = z_prop;
      u_curr = u_prop;
      (warm ? accepted_warm : accepted_post) += 1;
    }

    if (warm) {
      const double m = it;
      h_bar = (1.0 - 1.0 / (m + t0)) * h_bar +
              (config.target_accept - alpha) / (m + t0);
      log_eps = mu - std::sqrt(m) / gamma * h_bar;
      const double w = std::pow(m, -kappa);
      log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
      if (it == config.n_warmup) {
        chain.adapted_step =
            config.n_warmup > 0 ? std::exp(log_eps_bar) : config.step_size0;
        chain.warmup_accept = static_cast<double>(accepted_warm) / it;
        if (chain.warmup_accept < 0.05)
          throw std::runtime_error(
              "hmc: warmup acceptance rate " +
              std::to_string(chain.warmup_accept) +
              " is below 0.05; step size " + std::to_string(eps));
      }
    } else {
      if (config.n_warmup == 0 && it == 1)
        chain.adapted_step = config.step_size0;
      const int j = it - config.n_warmup - 1;
      chain.draws.row(j) = zeta.transpose();
      chain.potential[j] = u_curr;
    }
  }
  if (config.n_warmup == 0) chain.adapted_step = config.step_size0;
  chain.accept_rate = static_cast<double>(accepted_post) / config.n_samples;

  chain.ess = Vec(dim);
  for (int c = 0; c < dim; ++c)
    chain.ess[c] = effective_sample_size(chain.draws.col(c));
  return chain;
}

SampleChain run_hmc(const gp::ObservationSet& obs,
                    const kernel::FeatureMap& theta_fix,
                    const kernel::KernelHyper& psi_pre, const Vec& phi_pre,
                    const PriorSpec& priors, const pde::LinearOperatorSpec& op,
                    const pde::StencilPolicy& policy,
                    const std::vector<std::string>& phi_names,
                    const HmcConfig& config) {
  const ModelPotential target(obs, theta_fix, op, policy, priors);

  Vec xi0(priors.dim());
  xi0.head(priors.n_phi()) = phi_pre;
  xi0[priors.n_phi()] = psi_pre.sf2();
  xi0.tail(psi_pre.p()) = psi_pre.len();
  const Vec zeta0 = target.unconstrained(xi0);

  SampleChain chain = sample(target, zeta0, config);

  // Report draws in constrained space.
  for (int j = 0; j < chain.n_draws(); ++j)
    chain.draws.row(j) =
        target.constrained(chain.draws.row(j).transpose()).transpose();
  chain.names.assign(phi_names.begin(), phi_names.end());
  chain.names.push_back("sf2");
  for (int k = 0; k < psi_pre.p(); ++k)
    chain.names.push_back("ell_" + std::to_string(k + 1));
  // ESS over the constrained draws is what gets reported.
  for (int c = 0; c < chain.dim(); ++c)
    chain.ess[c] = effective_sample_size(chain.draws.col(c));
  return chain;
}

}  // namespace pidkl::hmc
