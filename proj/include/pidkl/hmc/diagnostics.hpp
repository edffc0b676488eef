#pragma once

#include "pidkl/types.hpp"

namespace pidkl::hmc {

/// ESS via Geyer's initial positive sequence: N / (2 sum_m Gamma_m - 1) with
/// Gamma_m = rho_{2m} + rho_{2m+1}, truncated at the first non-positive pair.
double effective_sample_size(const Vec& draws);

}  // namespace pidkl::hmc
