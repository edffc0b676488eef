#include "pidkl/nn/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pidkl::nn {

void Architecture::validate() const {
  if (widths.size() < 3)
    throw std::invalid_argument("architecture: need at least one hidden layer");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("architecture: widths must be >= 1");
}

int MlpParams::param_count() const {
  int n = 0;
  for (int l = 0; l < arch.num_layers(); ++l)
    n += arch.widths[l + 1] * (arch.widths[l] + 1);
  return n;
}

Vec MlpParams::flatten() const {
  Vec out(param_count());
  int t = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Mat& w = weights[l];
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) out[t++] = w(r, c);
    for (int r = 0; r < biases[l].size(); ++r) out[t++] = biases[l][r];
  }
  return out;
}

MlpParams MlpParams::unflatten(const Architecture& arch, const Vec& theta) {
  arch.validate();
  MlpParams p;
  p.arch = arch;
  int t = 0;
  for (int l = 0; l < arch.num_layers(); ++l) {
    const int rows = arch.widths[l + 1];
    const int cols = arch.widths[l];
    Mat w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = theta[t++];
    Vec b(rows);
    for (int r = 0; r < rows; ++r) b[r] = theta[t++];
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  if (t != theta.size())
    throw std::invalid_argument("unflatten: parameter vector length mismatch");
  return p;
}

MlpParams init(const Architecture& arch, unsigned long long seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  MlpParams p;
  p.arch = arch;
  for (int l = 0; l < arch.num_layers(); ++l) {
    const int fan_out = arch.widths[l + 1];
    const int fan_in = arch.widths[l];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    Mat w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = u(rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vec::Zero(fan_out));
  }
  return p;
}

Vec forward(const MlpParams& params, const Point& s) {
  if (s.size() != params.arch.input_dim())
    throw std::invalid_argument("mlp forward: input dimension mismatch");
  Vec a = s;
  const int n_layers = params.arch.num_layers();
  for (int l = 0; l < n_layers; ++l) {
    a = params.weights[l] * a + params.biases[l];
    if (l + 1 < n_layers) a = a.array().tanh().matrix();
  }
  return a;
}

std::vector<diff::Tape::Index> forward_on_tape(
    diff::Tape& tape, const Architecture& arch,
    std::span<const diff::Tape::Index> theta,
    std::span<const diff::Tape::Index> inputs) {
  arch.validate();
  if (static_cast<int>(inputs.size()) != arch.input_dim())
    throw std::invalid_argument("forward_on_tape: input dimension mismatch");
  std::vector<diff::Tape::Index> act(inputs.begin(), inputs.end());
  std::size_t t = 0;
  const int n_layers = arch.num_layers();
  for (int l = 0; l < n_layers; ++l) {
    const int rows = arch.widths[l + 1];
    const int cols = arch.widths[l];
    std::vector<diff::Tape::Index> next(rows);
    for (int r = 0; r < rows; ++r) {
      std::span<const diff::Tape::Index> w_row = theta.subspan(t + r * cols, cols);
      const diff::Tape::Index pre = tape.dot(w_row, act);
      const diff::Tape::Index b = theta[t + rows * cols + r];
      const diff::Tape::Index z = tape.add(pre, b);
      next[r] = (l + 1 < n_layers) ? tape.tanh_(z) : z;
    }
    t += rows * (cols + 1);
    act = std::move(next);
  }
  if (t != theta.size())
    throw std::invalid_argument("forward_on_tape: theta length mismatch");
  return act;
}

}  // namespace pidkl::nn
