#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pidkl/kernel/kernel.hpp"
#include "pidkl/pde/problems.hpp"

using namespace pidkl;
using kernel::OperatorKernelBackend;
using kernel::OperatorTag;

namespace {

kernel::KernelHyper unit_hyper(int p) {
  kernel::KernelHyper h;
  h.log_sf2 = 0.0;
  h.log_len = Vec::Zero(p);
  return h;
}

kernel::FeatureMap identity_map() {
  kernel::FeatureMap f;
  f.identity = true;
  return f;
}

std::vector<Point> random_points(const Domain& dom, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.15, 0.85);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    Point s(dom.dim());
    for (int c = 0; c < dom.dim(); ++c)
      s[c] = dom.lo(c) + u(rng) * dom.range(c);
    pts.push_back(std::move(s));
  }
  return pts;
}

}  // namespace

TEST_CASE("base_rbf basics") {
  const auto h = unit_hyper(3);
  Vec z(3);
  z << 0.1, -0.5, 2.0;
  CHECK(kernel::base_rbf(z, z, h) == doctest::Approx(1.0));

  const auto h1 = unit_hyper(1);
  CHECK(kernel::base_rbf(Vec::Zero(1), Vec::Ones(1), h1) ==
        doctest::Approx(0.606531).epsilon(1e-6));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 10; ++rep) {
    Vec a(3), b(3);
    for (int k = 0; k < 3; ++k) {
      a[k] = n01(rng);
      b[k] = n01(rng);
    }
    kernel::KernelHyper hr;
    hr.log_sf2 = n01(rng);
    hr.log_len = Vec::Constant(3, 0.3 * n01(rng));
    CHECK(kernel::base_rbf(a, b, hr) == kernel::base_rbf(b, a, hr));
    CHECK(kernel::base_rbf(a, b, hr) <= hr.sf2());
  }
  CHECK_THROWS_AS(kernel::base_rbf(Vec::Zero(2), Vec::Zero(3), unit_hyper(2)),
                  std::invalid_argument);
}

TEST_CASE("deep kernel with identity features equals base_rbf on coordinates") {
  const auto fmap = identity_map();
  const auto h = unit_hyper(2);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 10; ++rep) {
    Point s(2), sp(2);
    s << n01(rng), n01(rng);
    sp << n01(rng), n01(rng);
    CHECK(kernel::deep_kernel(s, sp, fmap, h) ==
          doctest::Approx(kernel::base_rbf(s, sp, h)).epsilon(1e-15));
    CHECK(std::abs(kernel::deep_kernel(s, sp, fmap, h) -
                   kernel::deep_kernel(sp, s, fmap, h)) <= 1e-12);
    CHECK(kernel::deep_kernel(s, s, fmap, h) == doctest::Approx(h.sf2()));
  }
}

TEST_CASE("deep kernel through a network stays symmetric and bounded") {
  kernel::FeatureMap fmap;
  fmap.net = nn::init(nn::Architecture{{2, 8, 2}}, 3);
  auto h = unit_hyper(2);
  h.log_sf2 = std::log(1.7);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 10; ++rep) {
    Point s(2), sp(2);
    s << n01(rng), n01(rng);
    sp << n01(rng), n01(rng);
    const double k1 = kernel::deep_kernel(s, sp, fmap, h);
    const double k2 = kernel::deep_kernel(sp, s, fmap, h);
    CHECK(std::abs(k1 - k2) <= 1e-12);
    CHECK(k1 <= h.sf2() + 1e-12);
  }
}

TEST_CASE("operator_kernel: tag none reproduces the deep kernel") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  const auto fmap = identity_map();
  const auto h = unit_hyper(2);
  Point s(2), sp(2);
  s << 0.3, 0.4;
  sp << 0.6, 0.9;
  const double k = kernel::operator_kernel(s, sp, fmap, h, problem.phi_true,
                                           problem.op, OperatorTag::kNone,
                                           OperatorKernelBackend::kStencil,
                                           policy);
  CHECK(k == kernel::deep_kernel(s, sp, fmap, h));
}

TEST_CASE("operator_kernel left-derivative example: d/dx of the 1D RBF") {
  // Same time coordinate, unit hyperparameters: A_s kappa = -(x-x')kappa,
  // which at (x, x') = (0, 1) is e^{-1/2}.
  pde::LinearOperatorSpec op;
  op.dx = 1;
  pde::OperatorTerm ddx;
  ddx.coeff = pde::PhiAffineCoeff::constant(1.0);
  ddx.derivative = {0, 1};
  op.terms.push_back(ddx);

  const auto policy = pde::StencilPolicy::for_kernels(Domain::unit_box(1));
  const auto fmap = identity_map();
  const auto h = unit_hyper(2);
  Point s(2), sp(2);
  s << 0.5, 0.0;
  sp << 0.5, 1.0;
  const Vec phi(0);

  const double analytic = kernel::operator_kernel(
      s, sp, fmap, h, phi, op, OperatorTag::kLeft,
      OperatorKernelBackend::kAnalytic, policy);
  CHECK(analytic == doctest::Approx(0.606531).epsilon(1e-6));
  const double stencil = kernel::operator_kernel(
      s, sp, fmap, h, phi, op, OperatorTag::kLeft,
      OperatorKernelBackend::kStencil, policy);
  CHECK(std::abs(stencil - analytic) <= 1e-5);
}

TEST_CASE("heat operator, tag both: symmetric under argument swap") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  const auto fmap = identity_map();
  const auto h = unit_hyper(2);
  const auto pts = random_points(problem.domain, 8, 21);
  for (int i = 0; i + 1 < 8; i += 2) {
    const double kab = kernel::operator_kernel(
        pts[i], pts[i + 1], fmap, h, problem.phi_true, problem.op,
        OperatorTag::kBoth, OperatorKernelBackend::kStencil, policy);
    const double kba = kernel::operator_kernel(
        pts[i + 1], pts[i], fmap, h, problem.phi_true, problem.op,
        OperatorTag::kBoth, OperatorKernelBackend::kStencil, policy);
    CHECK(std::abs(kab - kba) <= 1e-8);
  }
}

TEST_CASE("stencil and analytic backends agree for heat and ADR operators") {
  struct Case {
    std::string name;
    std::optional<int> dim;
  };
  for (const Case& c : {Case{"heat1d", {}}, Case{"adr50d", 2}}) {
    pde::ProblemOverrides ov;
    ov.dimension = c.dim;
    const auto problem = pde::make_problem(c.name, ov);
    const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
    const auto fmap = identity_map();
    kernel::KernelHyper h = unit_hyper(problem.domain.dim());
    h.log_sf2 = std::log(1.3);
    h.log_len = Vec::Constant(problem.domain.dim(), std::log(0.8));

    const auto pts = random_points(problem.domain, 40, 31);
    for (OperatorTag tag : {OperatorTag::kNone, OperatorTag::kLeft,
                            OperatorTag::kRight, OperatorTag::kBoth}) {
      std::vector<double> sten, ana;
      double scale = 0.0;
      for (int i = 0; i + 1 < 40; i += 2) {
        sten.push_back(kernel::operator_kernel(
            pts[i], pts[i + 1], fmap, h, problem.phi_true, problem.op, tag,
            OperatorKernelBackend::kStencil, policy));
        ana.push_back(kernel::operator_kernel(
            pts[i], pts[i + 1], fmap, h, problem.phi_true, problem.op, tag,
            OperatorKernelBackend::kAnalytic, policy));
        scale = std::max(scale, std::abs(ana.back()));
      }
      for (std::size_t k = 0; k < sten.size(); ++k) {
        const double rel = std::abs(sten[k] - ana[k]) /
                           std::max(std::abs(ana[k]), 0.01 * scale);
        CHECK(rel <= 1e-4);
      }
    }
  }
}

TEST_CASE("gram blocks: entries, transpose identity, and PSD after nugget") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  const auto fmap = identity_map();
  const auto h = unit_hyper(2);

  const auto up = random_points(problem.domain, 8, 41);
  const auto fp = random_points(problem.domain, 6, 43);
  const kernel::GramSide urows{&up, false};
  const kernel::GramSide frows{&fp, true};

  const Mat kuu = kernel::gram(urows, urows, fmap, h, problem.phi_true,
                               problem.op, OperatorKernelBackend::kStencil,
                               policy);
  const Mat kuf = kernel::gram(urows, frows, fmap, h, problem.phi_true,
                               problem.op, OperatorKernelBackend::kStencil,
                               policy);
  const Mat kfu = kernel::gram(frows, urows, fmap, h, problem.phi_true,
                               problem.op, OperatorKernelBackend::kStencil,
                               policy);
  const Mat kff = kernel::gram(frows, frows, fmap, h, problem.phi_true,
                               problem.op, OperatorKernelBackend::kStencil,
                               policy);

  CHECK(kuu(2, 3) == kernel::operator_kernel(
                         up[2], up[3], fmap, h, problem.phi_true, problem.op,
                         OperatorTag::kNone, OperatorKernelBackend::kStencil,
                         policy));
  CHECK((kuf.transpose() - kfu).cwiseAbs().maxCoeff() <= 1e-8);

  Mat joint(14, 14);
  joint.topLeftCorner(8, 8) = kuu;
  joint.topRightCorner(8, 6) = kuf;
  joint.bottomLeftCorner(6, 8) = kuf.transpose();
  joint.bottomRightCorner(6, 6) = kff;
  joint.diagonal().array() += 1e-6;
  const Eigen::SelfAdjointEigenSolver<Mat> eig(joint);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
}

TEST_CASE("analytic backend refuses a learned feature map") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  kernel::FeatureMap fmap;
  fmap.net = nn::init(nn::Architecture{{2, 4, 2}}, 2);
  Point s(2), sp(2);
  s << 0.2, 0.3;
  sp << 0.7, 0.8;
  CHECK_THROWS_AS(
      kernel::operator_kernel(s, sp, fmap, unit_hyper(2), problem.phi_true,
                              problem.op, OperatorTag::kLeft,
                              OperatorKernelBackend::kAnalytic, policy),
      std::invalid_argument);
}
