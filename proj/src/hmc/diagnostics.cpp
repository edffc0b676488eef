#include "pidkl/hmc/diagnostics.hpp"

#include <cmath>

namespace pidkl::hmc {

double effective_sample_size(const Vec& draws) {
  const int n = static_cast<int>(draws.size());
  if (n < 4) return static_cast<double>(n);
  const double mean = draws.mean();
  const Vec x = draws.array() - mean;
  const double c0 = x.squaredNorm() / n;
  if (!(c0 > 0.0)) return static_cast<double>(n);

  auto rho = [&](int lag) {
    double acc = 0.0;
    for (int i = 0; i + lag < n; ++i) acc += x[i] * x[i + lag];
    return acc / (n * c0);
  };

  double tau_sum = 0.0;  // sum of Gamma_m over the positive initial sequence
  for (int m = 0; 2 * m + 1 < n; ++m) {
    const double gamma = rho(2 * m) + rho(2 * m + 1);
    if (gamma <= 0.0) break;
    tau_sum += gamma;
  }
  const double tau = std::max(1.0, 2.0 * tau_sum - 1.0);
  return n / tau;
}

}  // namespace pidkl::hmc
