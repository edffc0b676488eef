#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pidkl/gp/gpr.hpp"
#include "pidkl/gp/joint_model.hpp"
#include "pidkl/pde/problems.hpp"

using namespace pidkl;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

kernel::FeatureMap identity_map() {
  kernel::FeatureMap f;
  f.identity = true;
  return f;
}

std::vector<Point> random_points(int n, int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    Point s(dim);
    for (int c = 0; c < dim; ++c) s[c] = u(rng);
    pts.push_back(std::move(s));
  }
  return pts;
}

gp::ObservationSet random_instance(const pde::ProblemSpec& problem, int n_u,
                                   int n_f, unsigned seed) {
  gp::ObservationSet obs;
  obs.s_u = random_points(n_u, problem.domain.dim(), seed);
  obs.s_f = random_points(n_f, problem.domain.dim(), seed + 1);
  std::mt19937_64 rng(seed + 2);
  std::normal_distribution<double> n01;
  obs.u = Vec(n_u);
  for (int i = 0; i < n_u; ++i) obs.u[i] = n01(rng);
  obs.f = Vec(n_f);
  for (int j = 0; j < n_f; ++j) obs.f[j] = n01(rng);
  // Clustered random points make RBF grams nearly singular; a moderate
  // nugget keeps both likelihood routes inside the comparison tolerance.
  obs.tau_u_sq = 1e-4;
  obs.tau_f_sq = 1e-4;
  return obs;
}

/// Replaces the observation values with a draw from the joint GP itself, so
/// the data-model mismatch terms stay at their natural chi-squared scale.
void draw_from_model(gp::ObservationSet& obs, const kernel::FeatureMap& fmap,
                     const kernel::KernelHyper& h, const Vec& phi,
                     const pde::LinearOperatorSpec& op,
                     const pde::StencilPolicy& policy, unsigned seed) {
  const gp::JointModel model(obs, fmap, op, policy,
                             static_cast<int>(phi.size()));
  const Mat m = model.joint_matrix(model.assemble(h, phi));
  const auto chol = gp::chol_jitter(m, 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Vec eta(m.rows());
  for (int i = 0; i < eta.size(); ++i) eta[i] = n01(rng);
  const Vec d = chol.lower * eta;
  obs.u = d.head(obs.n_u());
  obs.f = d.tail(obs.n_f());
}

}  // namespace

TEST_CASE("chol_jitter: identity needs no jitter") {
  const auto f = gp::chol_jitter(Mat::Identity(4, 4), 0.0);
  CHECK(f.jitter_used == 0.0);
  CHECK((f.lower - Mat::Identity(4, 4)).norm() <= 1e-14);
}

TEST_CASE("chol_jitter: hand Cholesky of [[4,2],[2,3]]") {
  Mat k(2, 2);
  k << 4, 2, 2, 3;
  const auto f = gp::chol_jitter(k, 0.0);
  Mat expected(2, 2);
  expected << 2, 0, 1, std::sqrt(2.0);
  CHECK((f.lower - expected).norm() <= 1e-12);
  CHECK(f.log_det() == doctest::Approx(std::log(8.0)));
}

TEST_CASE("chol_jitter: rank-1 matrix succeeds on the ladder") {
  Vec v(5);
  v << 1, -2, 0.5, 3, -1;
  const Mat k = v * v.transpose();
  const auto f = gp::chol_jitter(k, 0.0);
  CHECK(f.jitter_used <= 1e-4);
  const Mat rebuilt = f.lower * f.lower.transpose();
  Mat target = k;
  target.diagonal().array() += f.jitter_used;
  CHECK((rebuilt - target).norm() <= 1e-8 * std::max(1.0, target.norm()));
}

TEST_CASE("chol_jitter: factor reconstructs the jittered input") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  Mat a(6, 6);
  for (int i = 0; i < 36; ++i) a(i / 6, i % 6) = n01(rng);
  const Mat k = a * a.transpose();
  const auto f = gp::chol_jitter(k, 1e-6);
  Mat target = k;
  target.diagonal().array() += 1e-6 + f.jitter_used;
  CHECK((f.lower * f.lower.transpose() - target).norm() <=
        1e-8 * target.norm());
}

TEST_CASE("gpr_predict nearly interpolates at a training point") {
  // Spread-out inputs with a short lengthscale keep the gram well
  // conditioned, so the nugget is the only interpolation slack.
  const auto fmap = identity_map();
  kernel::KernelHyper h;
  h.log_len = Vec::Constant(2, std::log(0.25));
  std::vector<Point> pts;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Point s(2);
      s << 0.1 + 0.4 * i, 0.1 + 0.4 * j;
      pts.push_back(std::move(s));
    }
  Vec y(9);
  for (int i = 0; i < 9; ++i) y[i] = std::sin(3 * pts[i][0]) + pts[i][1];
  const auto pred = gp::gpr_predict(pts, y, fmap, h, 1e-6, {pts[4]});
  CHECK(std::abs(pred.mean[0] - y[4]) <= 1e-4);
  CHECK(pred.variance[0] >= 0.0);
  CHECK(pred.variance[0] <= 1e-6 + 1e-8);
}

TEST_CASE("gpr_predict reverts to the prior far from data") {
  const auto fmap = identity_map();
  kernel::KernelHyper h;
  h.log_sf2 = std::log(1.9);
  h.log_len = Vec::Constant(1, std::log(0.05));
  std::vector<Point> pts = {Point::Zero(1)};
  Vec y = Vec::Ones(1);
  const auto pred =
      gp::gpr_predict(pts, y, fmap, h, 1e-6, {Point::Constant(1, 50.0)});
  CHECK(std::abs(pred.mean[0]) <= 1e-10);
  CHECK(pred.variance[0] == doctest::Approx(1.9).epsilon(1e-9));
}

TEST_CASE("gpr_predict matches the explicit-inverse oracle on 3 points") {
  const auto fmap = identity_map();
  kernel::KernelHyper h;
  h.log_sf2 = std::log(1.4);
  h.log_len = Vec::Constant(2, std::log(0.7));
  const auto pts = random_points(3, 2, 9);
  Vec y(3);
  y << 0.5, -1.0, 2.0;
  const auto test = random_points(4, 2, 10);
  const auto pred = gp::gpr_predict(pts, y, fmap, h, 1e-4, test);

  Mat k(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k(i, j) = kernel::deep_kernel(pts[i], pts[j], fmap, h);
  k.diagonal().array() += 1e-4;
  const Mat kinv = k.inverse();  // brute-force oracle, tiny instance
  for (int t = 0; t < 4; ++t) {
    Vec ks(3);
    for (int i = 0; i < 3; ++i)
      ks[i] = kernel::deep_kernel(pts[i], test[t], fmap, h);
    const double mean = ks.dot(kinv * y);
    const double var = h.sf2() - ks.dot(kinv * ks);
    CHECK(std::abs(pred.mean[t] - mean) <= 1e-10);
    CHECK(std::abs(pred.variance[t] - var) <= 1e-10);
  }
}

TEST_CASE("joint_nlml with no f-observations is the standard NLML") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  const auto fmap = identity_map();
  kernel::KernelHyper h;
  h.log_sf2 = std::log(0.8);
  h.log_len = Vec::Constant(2, std::log(0.6));

  gp::ObservationSet obs;
  obs.s_u = random_points(7, 2, 21);
  obs.u = Vec::LinSpaced(7, -1.0, 1.0);
  obs.f = Vec(0);
  obs.tau_u_sq = 1e-5;

  const double nlml =
      gp::joint_nlml(obs, fmap, h, problem.phi_true, problem.op, policy);

  Mat k(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      k(i, j) = kernel::deep_kernel(obs.s_u[i], obs.s_u[j], fmap, h);
  k.diagonal().array() += obs.tau_u_sq;
  const double expected = 0.5 * obs.u.dot(k.inverse() * obs.u) +
                          0.5 * std::log(k.determinant()) + 3.5 * kLog2Pi;
  CHECK(nlml == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("joint_nlml of a single zero observation with unit variance") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  const auto fmap = identity_map();
  kernel::KernelHyper h;
  h.log_sf2 = 0.0;  // kappa(s, s) = 1
  h.log_len = Vec::Zero(2);

  gp::ObservationSet obs;
  obs.s_u = {Point::Constant(2, 0.5)};
  obs.u = Vec::Zero(1);
  obs.f = Vec(0);
  obs.tau_u_sq = 1e-12;  // the nugget must stay positive

  const double nlml =
      gp::joint_nlml(obs, fmap, h, problem.phi_true, problem.op, policy);
  CHECK(nlml == doctest::Approx(0.918939).epsilon(1e-6));
}

TEST_CASE("zero-coefficient operator decouples the Schur block") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  pde::LinearOperatorSpec zero_op;
  zero_op.dx = 1;
  pde::OperatorTerm t;
  t.coeff = pde::PhiAffineCoeff::constant(0.0);
  t.derivative = {0, 0};
  zero_op.terms.push_back(t);

  const auto fmap = identity_map();
  kernel::KernelHyper h;
  h.log_len = Vec::Zero(2);
  auto obs = random_instance(problem, 5, 4, 33);

  const auto dec =
      gp::decomposed_loglik(obs, fmap, h, problem.phi_true, zero_op, policy);
  // K_uf = K_ff = 0, so h = 0 and R_ff^-1 = tau_f^2 I.
  CHECK(dec.fidelity ==
        doctest::Approx(obs.f.squaredNorm() / obs.tau_f_sq).epsilon(1e-9));
  CHECK(dec.complexity ==
        doctest::Approx(4 * std::log(obs.tau_f_sq)).epsilon(1e-9));
}

TEST_CASE("appendix identity: decomposed path equals -joint_nlml") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nu(1, 15), nf(0, 15);
  const auto fmap = identity_map();
  for (int rep = 0; rep < 10; ++rep) {
    kernel::KernelHyper h;
    h.log_sf2 = 0.5 * (u(rng) - 0.5);
    h.log_len = Vec::Constant(2, 0.5 * (u(rng) - 0.5));
    const Vec phi = Vec::Constant(1, 2.0 * u(rng));

    auto obs = random_instance(problem, nu(rng), nf(rng), 200 + rep);
    draw_from_model(obs, fmap, h, phi, problem.op, policy, 400 + rep);
    const double nlml = gp::joint_nlml(obs, fmap, h, phi, problem.op, policy);
    const auto dec =
        gp::decomposed_loglik(obs, fmap, h, phi, problem.op, policy);
    CHECK(dec.fidelity >= 0.0);
    CHECK(std::abs(dec.loglik() + nlml) <= 1e-8);
  }
  // The learned-feature route satisfies the same identity at the scale of
  // the terms involved.
  for (int rep = 0; rep < 3; ++rep) {
    kernel::FeatureMap net_map;
    net_map.scaler.lo = Vec::Zero(2);
    net_map.scaler.hi = Vec::Ones(2);
    net_map.net = nn::init(nn::Architecture{{2, 6, 2}}, 100 + rep);
    kernel::KernelHyper h;
    h.log_sf2 = 0.5 * (u(rng) - 0.5);
    h.log_len = Vec::Constant(2, 0.5 * (u(rng) - 0.5));
    const Vec phi = Vec::Constant(1, 2.0 * u(rng));
    auto obs = random_instance(problem, 9, 7, 300 + rep);
    draw_from_model(obs, net_map, h, phi, problem.op, policy, 500 + rep);
    const double nlml = gp::joint_nlml(obs, net_map, h, phi, problem.op, policy);
    const auto dec =
        gp::decomposed_loglik(obs, net_map, h, phi, problem.op, policy);
    const double scale =
        std::max(1.0, std::abs(dec.fidelity) + std::abs(dec.complexity));
    CHECK(std::abs(dec.loglik() + nlml) <= 1e-8 * scale);
  }
}

TEST_CASE("joint_nlml is invariant under permuting the observations") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  const auto fmap = identity_map();
  kernel::KernelHyper h;
  h.log_len = Vec::Constant(2, std::log(0.5));
  auto obs = random_instance(problem, 6, 5, 77);
  obs.tau_u_sq = 1e-3;
  obs.tau_f_sq = 1e-3;
  draw_from_model(obs, fmap, h, problem.phi_true, problem.op, policy, 78);
  const double base =
      gp::joint_nlml(obs, fmap, h, problem.phi_true, problem.op, policy);

  auto perm = obs;
  std::swap(perm.s_u[0], perm.s_u[3]);
  std::swap(perm.u[0], perm.u[3]);
  std::swap(perm.s_f[1], perm.s_f[4]);
  std::swap(perm.f[1], perm.f[4]);
  const double permuted =
      gp::joint_nlml(perm, fmap, h, problem.phi_true, problem.op, policy);
  CHECK(std::abs(base - permuted) <= 1e-10);
}

TEST_CASE("fast assembly agrees with the entrywise gram reference") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  kernel::FeatureMap fmap;
  fmap.scaler.lo = Vec::Zero(2);
  fmap.scaler.hi = Vec::Ones(2);
  fmap.net = nn::init(nn::Architecture{{2, 6, 2}}, 8);
  kernel::KernelHyper h;
  h.log_sf2 = 0.2;
  h.log_len = Vec::Constant(2, -0.1);
  const Vec phi = Vec::Constant(1, 1.3);

  auto obs = random_instance(problem, 6, 5, 91);
  const gp::JointModel model(obs, fmap, problem.op, policy, 1);
  const auto blocks = model.assemble(h, phi);

  const kernel::GramSide urows{&obs.s_u, false};
  const kernel::GramSide frows{&obs.s_f, true};
  const Mat kuu = kernel::gram(urows, urows, fmap, h, phi, problem.op,
                               kernel::OperatorKernelBackend::kStencil, policy);
  const Mat kuf = kernel::gram(urows, frows, fmap, h, phi, problem.op,
                               kernel::OperatorKernelBackend::kStencil, policy);
  const Mat kff = kernel::gram(frows, frows, fmap, h, phi, problem.op,
                               kernel::OperatorKernelBackend::kStencil, policy);
  CHECK((blocks.kuu - kuu).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((blocks.kuf - kuf).cwiseAbs().maxCoeff() <= 1e-9);
  // K_ff sums the same stencil terms in a different order; the comparison
  // scale carries the 1/h^4 weight amplification of entry round-off.
  const double kff_scale = std::max(1.0, kff.cwiseAbs().maxCoeff());
  CHECK((blocks.kff - kff).cwiseAbs().maxCoeff() <= 5e-8 * kff_scale);
}

TEST_CASE("conditional prediction with no f-observations equals gpr_predict") {
  const auto problem = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_kernels(problem.domain);
  const auto fmap = identity_map();
  kernel::KernelHyper h;
  h.log_sf2 = 0.3;
  h.log_len = Vec::Constant(2, std::log(0.35));

  gp::ObservationSet obs;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Point s(2);
      s << 0.15 + 0.35 * i, 0.15 + 0.35 * j;
      obs.s_u.push_back(std::move(s));
    }
  obs.u = Vec::LinSpaced(9, -2.0, 1.0);
  obs.f = Vec(0);
  obs.tau_u_sq = 1e-4;

  const gp::JointModel model(obs, fmap, problem.op, policy, 1);
  const auto test = random_points(5, 2, 102);
  const auto joint_pred = model.predict(h, problem.phi_true, test);
  const auto gpr = gp::gpr_predict(obs.s_u, obs.u, fmap, h, obs.tau_u_sq, test);
  for (int t = 0; t < 5; ++t) {
    CHECK(std::abs(joint_pred.mean[t] - gpr.mean[t]) <= 1e-10);
    CHECK(std::abs(joint_pred.cov(t, t) - gpr.variance[t]) <= 1e-10);
  }
}
