#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pidkl/nn/mlp.hpp"

using namespace pidkl;

namespace {
const nn::Architecture kArch{{2, 8, 8, 3}};
}

TEST_CASE("init is deterministic per seed and biases are zero") {
  const auto a = nn::init(kArch, 99);
  const auto b = nn::init(kArch, 99);
  const auto c = nn::init(kArch, 100);
  CHECK(a.flatten() == b.flatten());
  CHECK(a.flatten() != c.flatten());
  for (const auto& bias : a.biases) CHECK(bias.norm() == 0.0);
}

TEST_CASE("xavier weight variance matches the uniform bound") {
  // Var of U(-b, b) is b^2/3 = 2/(fan_in + fan_out); Monte Carlo over seeds.
  const nn::Architecture arch{{4, 50, 2}};
  double sum = 0.0, sum2 = 0.0;
  long count = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const auto p = nn::init(arch, seed);
    const Mat& w = p.weights[0];
    sum += w.sum();
    sum2 += w.squaredNorm();
    count += w.size();
  }
  const double mean = sum / count;
  const double var = sum2 / count - mean * mean;
  const double expected = 2.0 / (4 + 50);
  CHECK(std::abs(var - expected) <= 0.1 * expected);
}

TEST_CASE("zero parameters give a zero feature vector") {
  nn::MlpParams p;
  p.arch = kArch;
  for (int l = 0; l < kArch.num_layers(); ++l) {
    p.weights.push_back(Mat::Zero(kArch.widths[l + 1], kArch.widths[l]));
    p.biases.push_back(Vec::Zero(kArch.widths[l + 1]));
  }
  Point s(2);
  s << 0.3, -0.7;
  CHECK(nn::forward(p, s).norm() == 0.0);
}

TEST_CASE("flatten/unflatten round-trip preserves every entry") {
  const auto p = nn::init(kArch, 5);
  const Vec theta = p.flatten();
  const auto q = nn::MlpParams::unflatten(kArch, theta);
  CHECK(q.flatten() == theta);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    CHECK(p.weights[l] == q.weights[l]);
    CHECK(p.biases[l] == q.biases[l]);
  }
}

TEST_CASE("tape forward matches the plain forward") {
  const auto p = nn::init(kArch, 11);
  const Vec theta = p.flatten();
  Point s(2);
  s << 0.25, -1.4;

  diff::Tape tape;
  std::vector<diff::Tape::Index> th(theta.size());
  std::vector<double> seeds(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    th[i] = tape.leaf();
    seeds[i] = theta[i];
  }
  std::vector<diff::Tape::Index> in = {tape.constant(s[0]), tape.constant(s[1])};
  const auto out = nn::forward_on_tape(tape, kArch, th, in);
  std::vector<double> ones(out.size(), 1.0);
  tape.set_output(tape.affine(out, ones, 0.0));
  tape.forward(seeds);

  const Vec ref = nn::forward(p, s);
  for (std::size_t k = 0; k < out.size(); ++k)
    CHECK(tape.value(out[k]) ==
          doctest::Approx(ref[static_cast<Eigen::Index>(k)]).epsilon(1e-14));
}

TEST_CASE("input gradient of forward matches central FD") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  const auto p = nn::init(kArch, 17);
  const Vec theta = p.flatten();

  for (int rep = 0; rep < 5; ++rep) {
    Point s(2);
    s << n01(rng), n01(rng);

    diff::Tape tape;
    std::vector<diff::Tape::Index> in = {tape.leaf(), tape.leaf()};
    std::vector<diff::Tape::Index> th(theta.size());
    for (int i = 0; i < theta.size(); ++i) th[i] = tape.constant(theta[i]);
    const auto out = nn::forward_on_tape(tape, kArch, th, in);
    std::vector<double> ones(out.size(), 1.0);
    tape.set_output(tape.affine(out, ones, 0.0));

    const std::vector<double> seeds = {s[0], s[1]};
    const auto g = diff::tape_gradient(tape, seeds);

    const auto scalar = [&](const Point& x) { return nn::forward(p, x).sum(); };
    for (int c = 0; c < 2; ++c) {
      Point sp = s, sm = s;
      sp[c] += 1e-6;
      sm[c] -= 1e-6;
      const double fd = (scalar(sp) - scalar(sm)) / 2e-6;
      CHECK(std::abs(g[c] - fd) / std::max(1.0, std::abs(fd)) <= 1e-6);
    }
  }
}

TEST_CASE("parameter gradients of a scalar of forward match FD") {
  const auto p = nn::init(kArch, 23);
  const Vec theta = p.flatten();
  Point s(2);
  s << 0.6, -0.2;

  diff::Tape tape;
  std::vector<diff::Tape::Index> th(theta.size());
  std::vector<double> seeds(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    th[i] = tape.leaf();
    seeds[i] = theta[i];
  }
  std::vector<diff::Tape::Index> in = {tape.constant(s[0]), tape.constant(s[1])};
  const auto out = nn::forward_on_tape(tape, kArch, th, in);
  std::vector<double> ones(out.size(), 1.0);
  tape.set_output(tape.affine(out, ones, 0.0));
  const auto g = diff::tape_gradient(tape, seeds);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(theta.size()) - 1);
  for (int rep = 0; rep < 12; ++rep) {
    const int i = pick(rng);
    Vec tp = theta, tm = theta;
    tp[i] += 1e-6;
    tm[i] -= 1e-6;
    const double up = nn::forward(nn::MlpParams::unflatten(kArch, tp), s).sum();
    const double um = nn::forward(nn::MlpParams::unflatten(kArch, tm), s).sum();
    const double fd = (up - um) / 2e-6;
    CHECK(std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)) <= 1e-6);
  }
}

TEST_CASE("scaler maps the domain onto [-1,1]") {
  nn::InputScaler sc;
  sc.lo = Vec::Zero(2);
  sc.hi = Vec::Constant(2, 2.0);
  Point s(2);
  s << 0.0, 2.0;
  const Point z = sc.apply(s);
  CHECK(z[0] == -1.0);
  CHECK(z[1] == 1.0);
  CHECK(nn::InputScaler{}.apply(s) == s);
}

TEST_CASE("dimension mismatch is an error") {
  const auto p = nn::init(kArch, 1);
  CHECK_THROWS_AS(nn::forward(p, Point::Zero(5)), std::invalid_argument);
}
