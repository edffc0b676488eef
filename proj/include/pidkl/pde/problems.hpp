#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pidkl/gp/observation_set.hpp"
#include "pidkl/pde/operator.hpp"
#include "pidkl/types.hpp"

namespace pidkl::pde {

/// A manufactured inverse problem: operator, source, analytic solution,
/// domain, true parameters and their uniform prior box.
struct ProblemSpec {
  std::string name;
  LinearOperatorSpec op;
  PhiAffineCoeff source;  // f(s; phi), affine in phi
  std::function<double(const Point&)> solution;
  Domain domain;
  Vec phi_true;
  Vec phi_lo;
  Vec phi_hi;
  std::vector<std::string> phi_names;

  int dx() const { return domain.dx(); }
  int n_phi() const { return static_cast<int>(phi_true.size()); }
  double source_at(const Point& s, const Vec& phi) const {
    return source.eval(s, phi);
  }
};

struct ProblemOverrides {
  std::optional<int> dimension;
  std::optional<Vec> phi_true;
};

/// Builds one of the bundled problems: "heat1d", "heat50d", "adr50d".
/// The 50d constructions are dimension-parametric; `dimension` replaces 50.
ProblemSpec make_problem(const std::string& name,
                         const ProblemOverrides& overrides = {});

/// Uniform interior points: t in (0, t_max), x strictly inside the box,
/// excluding a ball of radius 1e-8 around the spatial origin (where the
/// heat50d source is singular). Deterministic per seed.
std::vector<Point> sample_interior(const Domain& domain, int n,
                                   unsigned long long seed);

/// Exact observations of u (analytic solution) and f (source at phi_true)
/// at independently sampled interior points, with default nuggets.
gp::ObservationSet generate_observations(const ProblemSpec& problem, int n_u,
                                         int n_f, unsigned long long seed,
                                         double tau_u_sq = 1e-6,
                                         double tau_f_sq = 1e-6);

}  // namespace pidkl::pde
