#include "pidkl/hmc/transform.hpp"

#include <cmath>
#include <stdexcept>

namespace pidkl::hmc {

namespace {
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

double ComponentMap::to_constrained(double z) const {
  switch (kind) {
    case Kind::kIdentity: return z;
    case Kind::kLog: return std::exp(z);
    case Kind::kLogit: return lo + (hi - lo) * sigmoid(z);
  }
  throw std::logic_error("unreachable");
}

double ComponentMap::to_unconstrained(double c) const {
  switch (kind) {
    case Kind::kIdentity: return c;
    case Kind::kLog:
      if (!(c > 0.0))
        throw std::domain_error("transform: log map needs a positive value");
      return std::log(c);
    case Kind::kLogit: {
      if (!(c > lo && c < hi))
        throw std::domain_error("transform: value outside the open box");
      const double r = (c - lo) / (hi - lo);
      return std::log(r) - std::log1p(-r);
    }
  }
  throw std::logic_error("unreachable");
}

double ComponentMap::log_jacobian(double z) const {
  switch (kind) {
    case Kind::kIdentity: return 0.0;
    case Kind::kLog: return z;
    case Kind::kLogit: {
      const double s = sigmoid(z);
      return std::log(hi - lo) + std::log(s) + std::log1p(-s);
    }
  }
  throw std::logic_error("unreachable");
}

Vec ParamTransform::to_constrained(const Vec& z) const {
  if (z.size() != dim())
    throw std::invalid_argument("transform: dimension mismatch");
  Vec c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = maps[i].to_constrained(z[i]);
  return c;
}

Vec ParamTransform::to_unconstrained(const Vec& c) const {
  if (c.size() != dim())
    throw std::invalid_argument("transform: dimension mismatch");
  Vec z(dim());
  for (int i = 0; i < dim(); ++i) z[i] = maps[i].to_unconstrained(c[i]);
  return z;
}

double ParamTransform::log_jacobian(const Vec& z) const {
  double lj = 0.0;
  for (int i = 0; i < dim(); ++i) lj += maps[i].log_jacobian(z[i]);
  return lj;
}

ParamTransform ParamTransform::box(const Vec& lo, const Vec& hi) {
  ParamTransform t;
  for (int i = 0; i < lo.size(); ++i)
    t.maps.push_back(ComponentMap::logit(lo[i], hi[i]));
  return t;
}

}  // namespace pidkl::hmc
