#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pidkl/types.hpp"

namespace pidkl::diff {

enum class OpKind : std::uint8_t {
  kConst,
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kExp,
  kLog,
  kTanh,
  kSin,
  kCos,
  kSqrt,
  kSigmoid,
  kAffine,    // bias + sum_i c_i * x_i, constant coefficients
  kDot,       // sum_i a_i * b_i
  kTripleDot, // sum_i a_i * b_i * c_i
  kRbf,       // sf2 * exp(-1/2 sum_k (za_k - zb_k)^2 / l_k^2), log-space hypers
  kCholOut,   // one entry of a Cholesky factor (see CholRecord)
};

const char* op_kind_name(OpKind k);

/// Scalar computation graph for one reverse-mode sweep.
///
/// Nodes are appended in topological order (parents always precede children),
/// so a single forward pass evaluates the graph and a single backward pass
/// accumulates adjoints. The topology is fixed after construction; forward()
/// may be re-run with fresh leaf values, which is how optimization loops reuse
/// one tape across iterations. Dense symmetric factorizations are embedded as
/// CholRecord blocks whose reverse step goes through cholesky_pullback.
class Tape {
 public:
  using Index = std::uint32_t;

  Index leaf(double initial_value = 0.0);
  Index constant(double value);

  Index add(Index a, Index b);
  Index sub(Index a, Index b);
  Index mul(Index a, Index b);
  Index div(Index a, Index b);
  Index neg(Index a);
  Index exp_(Index a);
  Index log_(Index a);
  Index tanh_(Index a);
  Index sin_(Index a);
  Index cos_(Index a);
  Index sqrt_(Index a);
  Index sigmoid(Index a);

  /// bias + sum_i coeffs[i] * args[i]
  Index affine(std::span<const Index> args, std::span<const double> coeffs,
               double bias);
  Index dot(std::span<const Index> a, std::span<const Index> b);
  Index triple_dot(std::span<const Index> a, std::span<const Index> b,
                   std::span<const Index> c);

  /// ARD-RBF kernel value between feature vectors za, zb with log-space
  /// hyperparameters (one fused node; partials are closed-form).
  Index rbf(std::span<const Index> za, std::span<const Index> zb,
            Index log_sf2, std::span<const Index> log_len);

  /// Cholesky factor of the symmetric matrix given by `lower_packed`
  /// (row-major lower triangle including diagonal, n*(n+1)/2 nodes).
  /// Adds base_nugget to the diagonal, escalating extra jitter x10 from
  /// 1e-10 to 1e-4 if the factorization fails. Returns the packed factor.
  std::vector<Index> cholesky(std::span<const Index> lower_packed, int n,
                              double base_nugget);

  void set_output(Index root);
  Index output() const { return output_; }

  std::size_t size() const { return kind_.size(); }
  std::size_t num_leaves() const { return leaf_ids_.size(); }

  /// Re-evaluates the graph at the given leaf values; returns the root value.
  /// Throws if any intermediate value is non-finite, naming the node kind.
  double forward(std::span<const double> leaf_values);

  /// Adjoint sweep; requires a prior forward(). Returns d(root)/d(leaf_i).
  std::vector<double> reverse() const;

  double value(Index i) const { return val_[i]; }
  double jitter_used(std::size_t chol_record) const {
    return chol_[chol_record].jitter_used;
  }
  std::size_t num_chol_records() const { return chol_.size(); }

 private:
  struct CholRecord {
    int n = 0;
    double base_nugget = 0.0;
    std::uint32_t in_begin = 0;   // offset into chol_args_
    Index out_begin = 0;
    mutable double jitter_used = 0.0;
    mutable Eigen::MatrixXd factor;  // cached by forward for the reverse pass
  };

  Index push(OpKind k, std::initializer_list<Index> args);
  Index push_node(OpKind k);
  std::uint32_t arg_end(std::size_t i) const {
    return i + 1 < kind_.size() ? arg_begin_[i + 1]
                                : static_cast<std::uint32_t>(args_.size());
  }

  std::vector<OpKind> kind_;
  std::vector<std::uint32_t> arg_begin_;  // size() + 1 offsets into args_
  std::vector<Index> args_;
  std::vector<std::uint32_t> aux_begin_;  // size() + 1 offsets into aux_
  std::vector<double> aux_;               // per-node constants
  std::vector<double> val_;
  std::vector<double> partial_;  // parallel to args_, filled by forward()
  std::vector<Index> leaf_ids_;
  std::vector<CholRecord> chol_;
  std::vector<Index> chol_args_;
  Index output_ = 0;
  bool has_output_ = false;
  bool forward_done_ = false;
};

/// Evaluates the tape at seed values and returns the gradient of the root
/// with respect to every leaf, in leaf creation order.
std::vector<double> tape_gradient(Tape& tape, std::span<const double> seeds);

/// Reverse-mode rule for S = L L^T: given the factor L and the adjoint of L,
/// returns the (symmetric) adjoint of S. Throws if L has a non-positive
/// diagonal entry.
Mat cholesky_pullback(const Mat& factor, const Mat& factor_adjoint);

/// Convenience handle for building scalar expressions on a tape.
struct Var {
  Tape* tape = nullptr;
  Tape::Index id = 0;
  double value() const { return tape->value(id); }
};

inline Var operator+(Var a, Var b) { return {a.tape, a.tape->add(a.id, b.id)}; }
inline Var operator-(Var a, Var b) { return {a.tape, a.tape->sub(a.id, b.id)}; }
inline Var operator*(Var a, Var b) { return {a.tape, a.tape->mul(a.id, b.id)}; }
inline Var operator/(Var a, Var b) { return {a.tape, a.tape->div(a.id, b.id)}; }
inline Var operator-(Var a) { return {a.tape, a.tape->neg(a.id)}; }
inline Var exp(Var a) { return {a.tape, a.tape->exp_(a.id)}; }
inline Var log(Var a) { return {a.tape, a.tape->log_(a.id)}; }
inline Var tanh(Var a) { return {a.tape, a.tape->tanh_(a.id)}; }
inline Var sqrt(Var a) { return {a.tape, a.tape->sqrt_(a.id)}; }

}  // namespace pidkl::diff
