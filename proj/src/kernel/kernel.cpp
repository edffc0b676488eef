#include "pidkl/kernel/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace pidkl::kernel {

Vec KernelHyper::pack() const {
  Vec v(1 + log_len.size());
  v[0] = log_sf2;
  v.tail(log_len.size()) = log_len;
  return v;
}

KernelHyper KernelHyper::unpack(const Vec& v) {
  if (v.size() < 2)
    throw std::invalid_argument("KernelHyper::unpack: need at least 2 entries");
  KernelHyper h;
  h.log_sf2 = v[0];
  h.log_len = v.tail(v.size() - 1);
  return h;
}

double base_rbf(const Vec& z, const Vec& zp, const KernelHyper& hyper) {
  if (z.size() != zp.size() || z.size() != hyper.log_len.size())
    throw std::invalid_argument("base_rbf: feature length mismatch");
  double q = 0.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double d = z[k] - zp[k];
    q += d * d * std::exp(-2.0 * hyper.log_len[k]);
  }
  return hyper.sf2() * std::exp(-0.5 * q);
}

double deep_kernel(const Point& s, const Point& sp, const FeatureMap& theta,
                   const KernelHyper& hyper) {
  return base_rbf(theta(s), theta(sp), hyper);
}

double gaussian_derivative_1d(int n, double d, double len) {
  const double il2 = 1.0 / (len * len);
  const double g = std::exp(-0.5 * d * d * il2);
  switch (n) {
    case 0: return g;
    case 1: return -d * il2 * g;
    case 2: return (d * d * il2 - 1.0) * il2 * g;
    case 3: return (3.0 * d - d * d * d * il2) * il2 * il2 * g;
    case 4:
      return (3.0 - 6.0 * d * d * il2 + d * d * d * d * il2 * il2) * il2 *
             il2 * g;
    default:
      throw std::invalid_argument(
          "gaussian_derivative_1d: order must be 0..4");
  }
}

namespace {

/// Analytic mixed derivative D^a_s D^b_s' kappa for the identity feature map.
/// With d_k = s_k - s'_k the kernel factorizes over coordinates, and each
/// s'-derivative contributes a sign flip.
double analytic_mixed_derivative(const Point& s, const Point& sp,
                                 const KernelHyper& hyper,
                                 const std::vector<int>& a,
                                 const std::vector<int>& b) {
  const int dim = static_cast<int>(a.size());
  const Vec len = hyper.len();
  double v = hyper.sf2();
  int b_total = 0;
  for (int c = 0; c < dim; ++c) {
    const int n = a[c] + b[c];
    if (n > 4)
      throw std::invalid_argument(
          "analytic backend: combined per-coordinate order above 4");
    v *= gaussian_derivative_1d(n, s[c] - sp[c], len[c]);
    b_total += b[c];
  }
  return (b_total % 2 == 0) ? v : -v;
}

double analytic_operator_kernel(const Point& s, const Point& sp,
                                const KernelHyper& hyper, const Vec& phi,
                                const pde::LinearOperatorSpec& op,
                                OperatorTag tag) {
  const int dim = op.dim();
  const std::vector<int> zero(dim, 0);
  double acc = 0.0;
  switch (tag) {
    case OperatorTag::kNone:
      return analytic_mixed_derivative(s, sp, hyper, zero, zero);
    case OperatorTag::kLeft:
      for (const auto& t : op.terms)
        acc += t.coeff.eval(s, phi) *
               analytic_mixed_derivative(s, sp, hyper, t.derivative, zero);
      return acc;
    case OperatorTag::kRight:
      for (const auto& t : op.terms)
        acc += t.coeff.eval(sp, phi) *
               analytic_mixed_derivative(s, sp, hyper, zero, t.derivative);
      return acc;
    case OperatorTag::kBoth:
      for (const auto& ta : op.terms)
        for (const auto& tb : op.terms)
          acc += ta.coeff.eval(s, phi) * tb.coeff.eval(sp, phi) *
                 analytic_mixed_derivative(s, sp, hyper, ta.derivative,
                                           tb.derivative);
      return acc;
  }
  throw std::logic_error("unreachable");
}

double stencil_operator_kernel(const Point& s, const Point& sp,
                               const FeatureMap& theta,
                               const KernelHyper& hyper, const Vec& phi,
                               const pde::LinearOperatorSpec& op,
                               OperatorTag tag,
                               const pde::StencilPolicy& policy) {
  const auto kappa = [&](const Point& x, const Point& y) {
    return deep_kernel(x, y, theta, hyper);
  };
  switch (tag) {
    case OperatorTag::kNone:
      return kappa(s, sp);
    case OperatorTag::kLeft:
      return pde::apply_operator(
          op, [&](const Point& x) { return kappa(x, sp); }, s, phi, policy);
    case OperatorTag::kRight:
      return pde::apply_operator(
          op, [&](const Point& y) { return kappa(s, y); }, sp, phi, policy);
    case OperatorTag::kBoth: {
      // Tensor product of per-argument stencils. The double application
      // commutes and the kernel is symmetric, so evaluating at a canonical
      // argument order makes swapped calls bit-identical.
      const Point* a = &s;
      const Point* bpt = &sp;
      for (Eigen::Index c = 0; c < s.size(); ++c) {
        if (s[c] == sp[c]) continue;
        if (sp[c] < s[c]) std::swap(a, bpt);
        break;
      }
      return pde::apply_operator(
          op,
          [&](const Point& x) {
            return pde::apply_operator(
                op, [&](const Point& y) { return kappa(x, y); }, *bpt, phi,
                policy);
          },
          *a, phi, policy);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

double operator_kernel(const Point& s, const Point& sp, const FeatureMap& theta,
                       const KernelHyper& hyper, const Vec& phi,
                       const pde::LinearOperatorSpec& op, OperatorTag tag,
                       OperatorKernelBackend backend,
                       const pde::StencilPolicy& policy) {
  if (backend == OperatorKernelBackend::kAnalytic) {
    if (!theta.identity)
      throw std::invalid_argument(
          "operator_kernel: analytic backend requires the identity feature map");
    return analytic_operator_kernel(s, sp, hyper, phi, op, tag);
  }
  const double v = stencil_operator_kernel(s, sp, theta, hyper, phi, op, tag,
                                           policy);
  if (!std::isfinite(v))
    throw std::runtime_error("operator_kernel: non-finite stencil evaluation");
  return v;
}

Mat gram(const GramSide& rows, const GramSide& cols, const FeatureMap& theta,
         const KernelHyper& hyper, const Vec& phi,
         const pde::LinearOperatorSpec& op, OperatorKernelBackend backend,
         const pde::StencilPolicy& policy) {
  const auto& rp = *rows.points;
  const auto& cp = *cols.points;
  OperatorTag tag = OperatorTag::kNone;
  if (rows.with_operator && cols.with_operator)
    tag = OperatorTag::kBoth;
  else if (rows.with_operator)
    tag = OperatorTag::kLeft;
  else if (cols.with_operator)
    tag = OperatorTag::kRight;

  Mat out(rp.size(), cp.size());
  for (std::size_t i = 0; i < rp.size(); ++i)
    for (std::size_t j = 0; j < cp.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          operator_kernel(rp[i], cp[j], theta, hyper, phi, op, tag, backend,
                          policy);
  return out;
}

}  // namespace pidkl::kernel
