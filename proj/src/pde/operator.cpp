#include "pidkl/pde/operator.hpp"

#include <algorithm>
#include <stdexcept>

namespace pidkl::pde {

double PhiAffineCoeff::eval(const Point& s, const Vec& phi) const {
  double v = base ? base(s) : 0.0;
  for (std::size_t m = 0; m < weights.size(); ++m)
    if (weights[m]) v += weights[m](s) * phi[static_cast<Eigen::Index>(m)];
  return v;
}

PhiAffineCoeff PhiAffineCoeff::constant(double c) {
  PhiAffineCoeff out;
  out.base = [c](const Point&) { return c; };
  return out;
}

void LinearOperatorSpec::validate() const {
  if (terms.empty())
    throw std::invalid_argument("operator: needs at least one term");
  for (const auto& t : terms) {
    if (static_cast<int>(t.derivative.size()) != dx + 1)
      throw std::invalid_argument("operator: multi-index dimension mismatch");
    if (t.derivative[0] > 1)
      throw std::invalid_argument("operator: temporal order must be <= 1");
    for (int c = 1; c <= dx; ++c)
      if (t.derivative[c] > 2)
        throw std::invalid_argument("operator: spatial order must be <= 2");
  }
}

StencilPolicy StencilPolicy::for_fields(const Domain& d) {
  StencilPolicy p;
  p.domain = d;
  p.step_fraction = 1e-3;
  p.accuracy = 2;
  p.shrink_to_domain = true;
  return p;
}

StencilPolicy StencilPolicy::for_kernels(const Domain& d) {
  StencilPolicy p;
  p.domain = d;
  p.step_fraction = 3e-2;
  p.step_cap = 0.04;
  p.accuracy = 4;
  p.shrink_to_domain = false;
  return p;
}

Vec StencilPolicy::steps_at(const Point& s,
                            const std::vector<int>& multi_index) const {
  const int dim = static_cast<int>(multi_index.size());
  Vec h(dim);
  const int max_off = accuracy == 4 ? 2 : 1;
  for (int c = 0; c < dim; ++c) {
    double hc = step_fraction * domain.range(c);
    if (step_cap > 0.0) hc = std::min(hc, step_cap);
    if (shrink_to_domain && multi_index[c] > 0) {
      const double margin =
          std::min(s[c] - domain.lo(c), domain.hi(c) - s[c]);
      if (margin > 0.0) hc = std::min(hc, 0.95 * margin / max_off);
    }
    h[c] = hc;
  }
  return h;
}

diff::Stencil term_stencil(const OperatorTerm& term, const Point& s,
                           const StencilPolicy& policy) {
  return diff::make_stencil(term.derivative,
                            policy.steps_at(s, term.derivative),
                            policy.accuracy);
}

double apply_operator(const LinearOperatorSpec& op,
                      const std::function<double(const Point&)>& field,
                      const Point& s, const Vec& phi,
                      const StencilPolicy& policy) {
  op.validate();
  double acc = 0.0;
  for (const auto& term : op.terms) {
    const double c = term.coeff.eval(s, phi);
    if (c == 0.0) continue;
    acc += c * diff::fd_derivative(field, s, term_stencil(term, s, policy));
  }
  return acc;
}

}  // namespace pidkl::pde
