#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pidkl/pde/problems.hpp"

using namespace pidkl;

namespace {

double max_residual(const pde::ProblemSpec& p, int n_points, unsigned seed) {
  const auto policy = pde::StencilPolicy::for_fields(p.domain);
  const auto pts = pde::sample_interior(p.domain, n_points, seed);
  double worst = 0.0;
  for (const auto& s : pts) {
    const double lhs =
        pde::apply_operator(p.op, p.solution, s, p.phi_true, policy);
    worst = std::max(worst, std::abs(lhs - p.source_at(s, p.phi_true)));
  }
  return worst;
}

}  // namespace

TEST_CASE("heat1d source and solution at the reference points") {
  const auto p = pde::make_problem("heat1d");
  Point s(2);
  s << 0.0, 0.5;  // (t, x)
  CHECK(p.source_at(s, p.phi_true) ==
        doctest::Approx(8.869604).epsilon(1e-6));
  CHECK(p.solution(s) == doctest::Approx(1.0));
  CHECK(p.phi_true[0] == 1.0);
  CHECK(p.phi_lo[0] == 0.0);
  CHECK(p.phi_hi[0] == 2.0);
}

TEST_CASE("adr50d source at the origin at t = 0") {
  const auto p = pde::make_problem("adr50d");
  Point s = Point::Zero(51);
  CHECK(p.source_at(s, p.phi_true) == doctest::Approx(-0.784).epsilon(1e-12));
}

TEST_CASE("heat50d diffusivity field is 1 at the spatial origin") {
  const auto p = pde::make_problem("heat50d");
  Point s = Point::Zero(51);
  s[0] = 0.3;
  // The second-derivative terms carry coefficient -kappa(x; alpha).
  const auto& lap = p.op.terms[1];
  REQUIRE(lap.derivative[1] == 2);
  CHECK(lap.coeff.eval(s, p.phi_true) == doctest::Approx(-1.0));
}

TEST_CASE("unknown problem name and bad overrides are errors") {
  CHECK_THROWS_AS(pde::make_problem("wave1d"), std::invalid_argument);
  pde::ProblemOverrides ov;
  ov.phi_true = Vec::Constant(1, 5.0);  // outside U(0, 2)
  CHECK_THROWS_AS(pde::make_problem("heat1d", ov), std::invalid_argument);
}

TEST_CASE("apply_operator is linear and vanishes on the zero field") {
  const auto p = pde::make_problem("heat1d");
  const auto policy = pde::StencilPolicy::for_fields(p.domain);
  Point s(2);
  s << 0.4, 0.6;
  const auto zero = [](const Point&) { return 0.0; };
  CHECK(pde::apply_operator(p.op, zero, s, p.phi_true, policy) == 0.0);

  const auto f1 = [](const Point& q) { return std::sin(q[0] + 2 * q[1]); };
  const auto f2 = [](const Point& q) { return std::exp(-q[0]) * q[1] * q[1]; };
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (int rep = 0; rep < 10; ++rep) {
    Point q(2);
    q << u(rng), u(rng);
    const double a = 1.7, b = -0.4;
    const auto combo = [&](const Point& x) { return a * f1(x) + b * f2(x); };
    const double lhs = pde::apply_operator(p.op, combo, q, p.phi_true, policy);
    const double rhs =
        a * pde::apply_operator(p.op, f1, q, p.phi_true, policy) +
        b * pde::apply_operator(p.op, f2, q, p.phi_true, policy);
    CHECK(std::abs(lhs - rhs) <= 1e-9);
  }
}

TEST_CASE("manufactured residual: heat1d at 100 interior points") {
  CHECK(max_residual(pde::make_problem("heat1d"), 100, 11) <= 1e-5);
}

TEST_CASE("manufactured residual: heat50d at paper dimension") {
  CHECK(max_residual(pde::make_problem("heat50d"), 100, 12) <= 1e-5);
}

TEST_CASE("manufactured residual: adr50d at paper dimension") {
  CHECK(max_residual(pde::make_problem("adr50d"), 100, 13) <= 1e-5);
}

TEST_CASE("manufactured residual survives the dimension override") {
  pde::ProblemOverrides ov;
  ov.dimension = 10;
  CHECK(max_residual(pde::make_problem("heat50d", ov), 100, 14) <= 1e-5);
  CHECK(max_residual(pde::make_problem("adr50d", ov), 100, 15) <= 1e-5);
}

TEST_CASE("observations are exact, deterministic, and interior") {
  const auto p = pde::make_problem("heat1d");
  const auto a = pde::generate_observations(p, 40, 25, 9001);
  const auto b = pde::generate_observations(p, 40, 25, 9001);
  const auto c = pde::generate_observations(p, 40, 25, 9002);

  CHECK(a.u == b.u);
  CHECK(a.f == b.f);
  CHECK(a.u != c.u);
  for (int i = 0; i < a.n_u(); ++i) {
    CHECK(a.u[i] == p.solution(a.s_u[i]));
    CHECK(a.s_u[i][0] > 0.0);
    CHECK(p.domain.contains(a.s_u[i]));
  }
  for (int j = 0; j < a.n_f(); ++j)
    CHECK(a.f[j] == p.source_at(a.s_f[j], p.phi_true));
  CHECK(a.tau_u_sq == 1e-6);
  CHECK(a.tau_f_sq == 1e-6);
}

TEST_CASE("sampling excludes the ball around the spatial origin") {
  pde::ProblemOverrides ov;
  ov.dimension = 2;
  const auto p = pde::make_problem("adr50d", ov);  // box [-2,2]^2
  const auto pts = pde::sample_interior(p.domain, 2000, 5);
  for (const auto& s : pts) CHECK(s.tail(2).norm() >= 1e-8);
}

TEST_CASE("collocation sampling has the uniform-law mean") {
  const auto p = pde::make_problem("heat1d");
  const auto pts = pde::sample_interior(p.domain, 10000, 77);
  Vec mean = Vec::Zero(2);
  for (const auto& s : pts) mean += s;
  mean /= 10000.0;
  // 3 sigma of the sample mean of U(0,1) at n = 1e4.
  const double bound = 3.0 * (1.0 / std::sqrt(12.0)) / 100.0;
  CHECK(std::abs(mean[0] - 0.5) <= bound);
  CHECK(std::abs(mean[1] - 0.5) <= bound);
}
