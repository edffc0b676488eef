#include <random>

#include "pidkl/pde/problems.hpp"

namespace pidkl::pde {

std::vector<Point> sample_interior(const Domain& domain, int n,
                                   unsigned long long seed) {
  if (n < 1) throw std::invalid_argument("sample_interior: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> pts;
  pts.reserve(n);
  const int dim = domain.dim();
  while (static_cast<int>(pts.size()) < n) {
    Point s(dim);
    bool ok = true;
    for (int c = 0; c < dim; ++c) {
      s[c] = domain.lo(c) + unit(rng) * domain.range(c);
      if (s[c] <= domain.lo(c) || s[c] >= domain.hi(c)) ok = false;
    }
    // The manufactured heat50d source is singular at the spatial origin.
    if (ok && s.tail(dim - 1).norm() < 1e-8) ok = false;
    if (ok) pts.push_back(std::move(s));
  }
  return pts;
}

gp::ObservationSet generate_observations(const ProblemSpec& problem, int n_u,
                                         int n_f, unsigned long long seed,
                                         double tau_u_sq, double tau_f_sq) {
  if (n_u < 1)
    throw std::invalid_argument("generate_observations: N_u must be >= 1");
  std::mt19937_64 seq(seed);
  const auto seed_u = seq();
  const auto seed_f = seq();

  gp::ObservationSet obs;
  obs.tau_u_sq = tau_u_sq;
  obs.tau_f_sq = tau_f_sq;
  obs.s_u = sample_interior(problem.domain, n_u, seed_u);
  obs.u = Vec(n_u);
  for (int i = 0; i < n_u; ++i) obs.u[i] = problem.solution(obs.s_u[i]);

  obs.f = Vec(std::max(n_f, 0));
  if (n_f > 0) {
    obs.s_f = sample_interior(problem.domain, n_f, seed_f);
    for (int j = 0; j < n_f; ++j)
      obs.f[j] = problem.source_at(obs.s_f[j], problem.phi_true);
  }
  obs.validate();
  return obs;
}

}  // namespace pidkl::pde
