#pragma once

#include <vector>

#include "pidkl/diff/tape.hpp"
#include "pidkl/types.hpp"

namespace pidkl::nn {

/// Fully connected tanh network: widths[0] inputs, widths.back() outputs,
/// tanh on hidden layers, identity on the output layer.
struct Architecture {
  std::vector<int> widths;

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  int num_layers() const { return static_cast<int>(widths.size()) - 1; }
  void validate() const;
};

/// Per-layer weights and biases, with a flat view used by optimizers.
/// Flat order is layer-major: weights row-major, then the bias, per layer.
struct MlpParams {
  Architecture arch;
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  int param_count() const;
  Vec flatten() const;
  static MlpParams unflatten(const Architecture& arch, const Vec& theta);
};

/// Xavier-uniform weights with bound sqrt(6/(fan_in+fan_out)), zero biases.
/// Deterministic per seed.
MlpParams init(const Architecture& arch, unsigned long long seed);

/// Forward pass at a single input.
Vec forward(const MlpParams& params, const Point& s);

/// Affine map onto [-1,1]^dim from per-coordinate bounds. An empty scaler
/// (no bounds) is the identity.
struct InputScaler {
  Vec lo, hi;

  bool identity() const { return lo.size() == 0; }
  Point apply(const Point& s) const {
    if (identity()) return s;
    return (2.0 * (s - lo).array() / (hi - lo).array() - 1.0).matrix();
  }
};

/// Tape view of the network: a layer of scalar nodes per activation.
/// `inputs` are already-scaled coordinates; `theta` are the flattened
/// parameter nodes (same order as MlpParams::flatten).
std::vector<diff::Tape::Index> forward_on_tape(
    diff::Tape& tape, const Architecture& arch,
    std::span<const diff::Tape::Index> theta,
    std::span<const diff::Tape::Index> inputs);

}  // namespace pidkl::nn
