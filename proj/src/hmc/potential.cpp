#include "pidkl/hmc/potential.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pidkl::hmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093453;
}  // namespace

Vec PotentialFn::gradient(const Vec& zeta, int* one_sided_fallbacks) const {
  const int n = dim();
  if (n > kMaxFdDim)
    throw std::invalid_argument(
        "potential gradient: dimension exceeds the FD budget guard (16)");
  Vec g(n);
  int fallbacks = 0;
  double center = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < n; ++i) {
    Vec zp = zeta, zm = zeta;
    zp[i] += kFdStep;
    zm[i] -= kFdStep;
    const double up = value(zp);
    const double um = value(zm);
    if (std::isfinite(up) && std::isfinite(um)) {
      g[i] = (up - um) / (2.0 * kFdStep);
    } else {
      if (!std::isfinite(center)) center = value(zeta);
      ++fallbacks;
      if (std::isfinite(up))
        g[i] = (up - center) / kFdStep;
      else if (std::isfinite(um))
        g[i] = (center - um) / kFdStep;
      else
        g[i] = 0.0;
    }
  }
  if (one_sided_fallbacks) *one_sided_fallbacks += fallbacks;
  return g;
}

struct ModelPotential::BaseCache {
  struct Entry {
    Vec key;
    std::shared_ptr<const gp::BaseBlocks> blocks;
  };
  std::list<Entry> entries;  // front = most recent
  static constexpr std::size_t kCapacity = 6;

  void seed(const Vec& log_len, std::shared_ptr<const gp::BaseBlocks> blocks) {
    entries.push_front({log_len, std::move(blocks)});
  }

  const gp::BaseBlocks& get(const gp::JointModel& model, const Vec& log_len) {
    for (auto it = entries.begin(); it != entries.end(); ++it) {
      if (it->key.size() == log_len.size() && it->key == log_len) {
        if (it != entries.begin()) entries.splice(entries.begin(), entries, it);
        return *entries.front().blocks;
      }
    }
    entries.push_front(
        {log_len,
         std::make_shared<const gp::BaseBlocks>(model.base_blocks(log_len))});
    if (entries.size() > kCapacity) entries.pop_back();
    return *entries.front().blocks;
  }
};

ModelPotential::ModelPotential(const gp::ObservationSet& obs,
                               const kernel::FeatureMap& theta_fix,
                               const pde::LinearOperatorSpec& op,
                               const pde::StencilPolicy& policy,
                               const PriorSpec& priors)
    : model_(obs, theta_fix, op, policy, priors.n_phi()), priors_(priors) {
  transform_ = ParamTransform::box(priors.phi_lo, priors.phi_hi);
  for (int k = 0; k < priors.n_psi(); ++k)
    transform_.maps.push_back(ComponentMap::log_scale());
}

double ModelPotential::value_cached(const Vec& zeta, BaseCache& cache) const {
  const int n_phi = priors_.n_phi();
  const int n_psi = priors_.n_psi();
  const Vec phi = [&] {
    Vec c(n_phi);
    for (int i = 0; i < n_phi; ++i) c[i] = transform_.maps[i].to_constrained(zeta[i]);
    return c;
  }();
  kernel::KernelHyper hyper;
  hyper.log_sf2 = zeta[n_phi];
  hyper.log_len = zeta.tail(n_psi - 1);

  double nlml;
  try {
    const gp::BaseBlocks& base = cache.get(model_, hyper.log_len);
    nlml = model_.nlml_from(base, hyper, phi);
  } catch (const std::exception&) {
    return kInf;
  }

  // Uniform phi prior (constant inside the box) plus the logit Jacobian.
  double logp = 0.0;
  for (int i = 0; i < n_phi; ++i) {
    logp += -std::log(priors_.phi_hi[i] - priors_.phi_lo[i]);
    logp += transform_.maps[i].log_jacobian(zeta[i]);
  }
  // psi prior declared directly over the log-space coordinates.
  const double sd = priors_.log_psi_sd;
  for (int k = 0; k < n_psi; ++k) {
    const double r = (zeta[n_phi + k] - priors_.log_psi_center[k]) / sd;
    logp += -0.5 * r * r - std::log(sd) - 0.5 * kLog2Pi;
  }
  return nlml - logp;
}

double ModelPotential::value(const Vec& zeta) const {
  BaseCache cache;
  return value_cached(zeta, cache);
}

Vec ModelPotential::gradient(const Vec& zeta, int* one_sided_fallbacks) const {
  const int n = dim();
  if (n > kMaxFdDim)
    throw std::invalid_argument(
        "potential gradient: dimension exceeds the FD budget guard (16)");
  Vec g(n);
  std::vector<double> up(n), um(n);

  // The phi and signal-variance legs of the FD stencil keep the base-point
  // lengthscales; share those kernel blocks across every worker.
  const int n_phi = priors_.n_phi();
  const Vec base_len = zeta.tail(priors_.n_psi() - 1);
  std::shared_ptr<const gp::BaseBlocks> base;
  try {
    base = std::make_shared<const gp::BaseBlocks>(model_.base_blocks(base_len));
  } catch (const std::exception&) {
    base.reset();
  }

#ifdef _OPENMP
  const int n_threads = std::min(omp_get_max_threads(), 2 * n);
#else
  const int n_threads = 1;
#endif
  std::vector<BaseCache> caches(std::max(1, n_threads));
  if (base)
    for (auto& c : caches) c.seed(base_len, base);
#ifdef _OPENMP
// Dynamic scheduling balances the lengthscale legs (which rebuild kernel
// blocks) against the cache-hitting phi legs; every leg is a pure function
// of its input, so the schedule cannot change the results.
#pragma omp parallel for schedule(dynamic, 1) num_threads(caches.size())
#endif
  for (int t = 0; t < 2 * n; ++t) {
#ifdef _OPENMP
    BaseCache& cache = caches[omp_get_thread_num()];
#else
    BaseCache& cache = caches[0];
#endif
    const int i = t / 2;
    Vec z = zeta;
    z[i] += (t % 2 == 0) ? kFdStep : -kFdStep;
    const double v = value_cached(z, cache);
    if (t % 2 == 0)
      up[i] = v;
    else
      um[i] = v;
  }

  int fallbacks = 0;
  double center = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(up[i]) && std::isfinite(um[i])) {
      g[i] = (up[i] - um[i]) / (2.0 * kFdStep);
    } else {
      if (!std::isfinite(center)) center = value_cached(zeta, caches[0]);
      ++fallbacks;
      if (std::isfinite(up[i]))
        g[i] = (up[i] - center) / kFdStep;
      else if (std::isfinite(um[i]))
        g[i] = (center - um[i]) / kFdStep;
      else
        g[i] = 0.0;
    }
  }
  if (one_sided_fallbacks) *one_sided_fallbacks += fallbacks;
  return g;
}

}  // namespace pidkl::hmc
