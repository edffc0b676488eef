#include "pidkl/pde/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace pidkl::pde {

namespace {

constexpr double kPi = 3.14159265358979323846;

ProblemSpec make_heat1d() {
  ProblemSpec p;
  p.name = "heat1d";
  p.domain = Domain::unit_box(1);
  p.phi_true = Vec::Constant(1, 1.0);
  p.phi_lo = Vec::Constant(1, 0.0);
  p.phi_hi = Vec::Constant(1, 2.0);
  p.phi_names = {"alpha"};

  p.op.dx = 1;
  OperatorTerm dt;
  dt.coeff = PhiAffineCoeff::constant(1.0);
  dt.derivative = {1, 0};
  p.op.terms.push_back(dt);
  OperatorTerm dxx;
  dxx.coeff.weights = {[](const Point&) { return -1.0; }};
  dxx.derivative = {0, 2};
  p.op.terms.push_back(dxx);

  p.solution = [](const Point& s) {
    return std::exp(-s[0]) * std::sin(kPi * s[1]);
  };
  p.source.base = [](const Point& s) {
    return -std::exp(-s[0]) * std::sin(kPi * s[1]);
  };
  p.source.weights = {[](const Point& s) {
    return kPi * kPi * std::exp(-s[0]) * std::sin(kPi * s[1]);
  }};
  return p;
}

// Diffusion field kappa(x; alpha) = 1 + sum_k alpha_k sin(k pi ||x|| / sqrt(d)).
ProblemSpec make_heat_highd(int d) {
  ProblemSpec p;
  p.name = "heat50d";
  p.domain = Domain::unit_box(d);
  p.phi_true = Vec(3);
  p.phi_true << 0.3, 0.1, 0.05;
  p.phi_lo = Vec::Constant(3, -0.3);
  p.phi_hi = Vec::Constant(3, 0.3);
  p.phi_names = {"alpha_1", "alpha_2", "alpha_3"};

  const double dd = d;
  const auto xnorm = [](const Point& s) { return s.tail(s.size() - 1).norm(); };
  const auto xsum = [](const Point& s) { return s.tail(s.size() - 1).sum(); };

  p.op.dx = d;
  OperatorTerm dt;
  dt.coeff = PhiAffineCoeff::constant(1.0);
  dt.derivative = std::vector<int>(d + 1, 0);
  dt.derivative[0] = 1;
  p.op.terms.push_back(dt);
  for (int i = 1; i <= d; ++i) {
    OperatorTerm lap;  // -kappa(x; alpha) d^2/dx_i^2
    lap.coeff.base = [](const Point&) { return -1.0; };
    for (int k = 1; k <= 3; ++k)
      lap.coeff.weights.push_back([k, dd, xnorm](const Point& s) {
        return -std::sin(k * kPi * xnorm(s) / std::sqrt(dd));
      });
    lap.derivative = std::vector<int>(d + 1, 0);
    lap.derivative[i] = 2;
    p.op.terms.push_back(lap);

    OperatorTerm adv;  // -(d kappa / d x_i) d/dx_i
    for (int k = 1; k <= 3; ++k)
      adv.coeff.weights.push_back([k, dd, i, xnorm](const Point& s) {
        const double r = xnorm(s);
        if (r < 1e-12) return 0.0;
        return -(k * kPi / std::sqrt(dd)) *
               std::cos(k * kPi * r / std::sqrt(dd)) * s[i] / r;
      });
    adv.derivative = std::vector<int>(d + 1, 0);
    adv.derivative[i] = 1;
    p.op.terms.push_back(adv);
  }

  p.solution = [dd, xsum](const Point& s) {
    return std::exp(-s[0]) * std::cos(xsum(s) / dd);
  };
  p.source.base = [dd, xsum](const Point& s) {
    return std::exp(-s[0]) * (1.0 / dd - 1.0) * std::cos(xsum(s) / dd);
  };
  for (int k = 1; k <= 3; ++k)
    p.source.weights.push_back([k, dd, xnorm, xsum](const Point& s) {
      const double r = xnorm(s);
      const double u = xsum(s) / dd;
      const double sk = std::sin(k * kPi * r / std::sqrt(dd));
      double v = sk / dd * std::cos(u);
      if (r >= 1e-12)
        v += (1.0 / dd) * (k * kPi / std::sqrt(dd)) *
             std::cos(k * kPi * r / std::sqrt(dd)) * (xsum(s) / r) *
             std::sin(u);
      return std::exp(-s[0]) * v;
    });
  return p;
}

// d_t u - alpha Lap u + beta 1^T grad u + gamma u = f on [-2,2]^d.
ProblemSpec make_adr_highd(int d) {
  ProblemSpec p;
  p.name = "adr50d";
  p.domain.t_max = 1.0;
  p.domain.x_lo = Vec::Constant(d, -2.0);
  p.domain.x_hi = Vec::Constant(d, 2.0);
  p.phi_true = Vec(3);
  p.phi_true << 0.8, 0.5, 0.2;
  p.phi_lo = Vec(3);
  p.phi_lo << 0.0, 0.0, 0.0;
  p.phi_hi = Vec(3);
  p.phi_hi << 2.0, 1.0, 1.0;
  p.phi_names = {"alpha", "beta", "gamma"};

  const double dd = d;
  const auto xsum = [](const Point& s) { return s.tail(s.size() - 1).sum(); };

  p.op.dx = d;
  OperatorTerm dt;
  dt.coeff = PhiAffineCoeff::constant(1.0);
  dt.derivative = std::vector<int>(d + 1, 0);
  dt.derivative[0] = 1;
  p.op.terms.push_back(dt);
  for (int i = 1; i <= d; ++i) {
    OperatorTerm lap;
    lap.coeff.weights = {[](const Point&) { return -1.0; }, nullptr, nullptr};
    lap.derivative = std::vector<int>(d + 1, 0);
    lap.derivative[i] = 2;
    p.op.terms.push_back(lap);

    OperatorTerm adv;
    adv.coeff.weights = {nullptr, [](const Point&) { return 1.0; }, nullptr};
    adv.derivative = std::vector<int>(d + 1, 0);
    adv.derivative[i] = 1;
    p.op.terms.push_back(adv);
  }
  OperatorTerm react;
  react.coeff.weights = {nullptr, nullptr, [](const Point&) { return 1.0; }};
  react.derivative = std::vector<int>(d + 1, 0);
  p.op.terms.push_back(react);

  p.solution = [dd, xsum](const Point& s) {
    return std::exp(-s[0]) * std::cos(xsum(s) / dd);
  };
  p.source.base = [dd, xsum](const Point& s) {
    return -std::exp(-s[0]) * std::cos(xsum(s) / dd);
  };
  p.source.weights = {
      [dd, xsum](const Point& s) {
        return std::exp(-s[0]) * std::cos(xsum(s) / dd) / dd;
      },
      [dd, xsum](const Point& s) {
        return -std::exp(-s[0]) * std::sin(xsum(s) / dd);
      },
      [dd, xsum](const Point& s) {
        return std::exp(-s[0]) * std::cos(xsum(s) / dd);
      },
  };
  return p;
}

}  // namespace

ProblemSpec make_problem(const std::string& name,
                         const ProblemOverrides& overrides) {
  ProblemSpec p;
  if (name == "heat1d") {
    if (overrides.dimension && *overrides.dimension != 1)
      throw std::invalid_argument("heat1d: dimension is fixed at 1");
    p = make_heat1d();
  } else if (name == "heat50d") {
    p = make_heat_highd(overrides.dimension.value_or(50));
  } else if (name == "adr50d") {
    p = make_adr_highd(overrides.dimension.value_or(50));
  } else {
    throw std::invalid_argument("make_problem: unknown problem '" + name + "'");
  }
  if (overrides.phi_true) {
    if (overrides.phi_true->size() != p.phi_true.size())
      throw std::invalid_argument("make_problem: phi_true override size");
    p.phi_true = *overrides.phi_true;
    for (int i = 0; i < p.phi_true.size(); ++i)
      if (p.phi_true[i] < p.phi_lo[i] || p.phi_true[i] > p.phi_hi[i])
        throw std::invalid_argument(
            "make_problem: phi_true override outside prior bounds");
  }
  p.op.validate();
  return p;
}

}  // namespace pidkl::pde
