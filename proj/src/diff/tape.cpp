#include "pidkl/diff/tape.hpp"

#include <cmath>
#include <sstream>

namespace pidkl::diff {

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::kConst: return "const";
    case OpKind::kLeaf: return "leaf";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kNeg: return "neg";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSin: return "sin";
    case OpKind::kCos: return "cos";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kAffine: return "affine";
    case OpKind::kDot: return "dot";
    case OpKind::kTripleDot: return "triple_dot";
    case OpKind::kRbf: return "rbf";
    case OpKind::kCholOut: return "chol_out";
  }
  return "unknown";
}

Tape::Index Tape::push_node(OpKind k) {
  kind_.push_back(k);
  arg_begin_.push_back(static_cast<std::uint32_t>(args_.size()));
  aux_begin_.push_back(static_cast<std::uint32_t>(aux_.size()));
  val_.push_back(0.0);
  forward_done_ = false;
  return static_cast<Index>(kind_.size() - 1);
}

Tape::Index Tape::push(OpKind k, std::initializer_list<Index> args) {
  const Index id = push_node(k);
  for (Index a : args) {
    args_.push_back(a);
    partial_.push_back(0.0);
  }
  return id;
}

Tape::Index Tape::leaf(double v) {
  const Index id = push_node(OpKind::kLeaf);
  val_[id] = v;
  leaf_ids_.push_back(id);
  return id;
}

Tape::Index Tape::constant(double v) {
  const Index id = push_node(OpKind::kConst);
  aux_.push_back(v);
  val_[id] = v;
  return id;
}

Tape::Index Tape::add(Index a, Index b) { return push(OpKind::kAdd, {a, b}); }
Tape::Index Tape::sub(Index a, Index b) { return push(OpKind::kSub, {a, b}); }
Tape::Index Tape::mul(Index a, Index b) { return push(OpKind::kMul, {a, b}); }
Tape::Index Tape::div(Index a, Index b) { return push(OpKind::kDiv, {a, b}); }
Tape::Index Tape::neg(Index a) { return push(OpKind::kNeg, {a}); }
Tape::Index Tape::exp_(Index a) { return push(OpKind::kExp, {a}); }
Tape::Index Tape::log_(Index a) { return push(OpKind::kLog, {a}); }
Tape::Index Tape::tanh_(Index a) { return push(OpKind::kTanh, {a}); }
Tape::Index Tape::sin_(Index a) { return push(OpKind::kSin, {a}); }
Tape::Index Tape::cos_(Index a) { return push(OpKind::kCos, {a}); }
Tape::Index Tape::sqrt_(Index a) { return push(OpKind::kSqrt, {a}); }
Tape::Index Tape::sigmoid(Index a) { return push(OpKind::kSigmoid, {a}); }

Tape::Index Tape::affine(std::span<const Index> args,
                         std::span<const double> coeffs, double bias) {
  if (args.size() != coeffs.size())
    throw std::invalid_argument("tape affine: args/coeffs size mismatch");
  const Index id = push_node(OpKind::kAffine);
  aux_.push_back(bias);
  for (std::size_t i = 0; i < args.size(); ++i) {
    args_.push_back(args[i]);
    partial_.push_back(0.0);
    aux_.push_back(coeffs[i]);
  }
  return id;
}

Tape::Index Tape::dot(std::span<const Index> a, std::span<const Index> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("tape dot: length mismatch");
  const Index id = push_node(OpKind::kDot);
  for (Index x : a) { args_.push_back(x); partial_.push_back(0.0); }
  for (Index x : b) { args_.push_back(x); partial_.push_back(0.0); }
  return id;
}

Tape::Index Tape::triple_dot(std::span<const Index> a,
                             std::span<const Index> b,
                             std::span<const Index> c) {
  if (a.size() != b.size() || a.size() != c.size())
    throw std::invalid_argument("tape triple_dot: length mismatch");
  const Index id = push_node(OpKind::kTripleDot);
  for (Index x : a) { args_.push_back(x); partial_.push_back(0.0); }
  for (Index x : b) { args_.push_back(x); partial_.push_back(0.0); }
  for (Index x : c) { args_.push_back(x); partial_.push_back(0.0); }
  return id;
}

Tape::Index Tape::rbf(std::span<const Index> za, std::span<const Index> zb,
                      Index log_sf2, std::span<const Index> log_len) {
  const std::size_t p = za.size();
  if (zb.size() != p || log_len.size() != p)
    throw std::invalid_argument("tape rbf: feature/lengthscale size mismatch");
  const Index id = push_node(OpKind::kRbf);
  aux_.push_back(static_cast<double>(p));
  for (Index x : za) { args_.push_back(x); partial_.push_back(0.0); }
  for (Index x : zb) { args_.push_back(x); partial_.push_back(0.0); }
  args_.push_back(log_sf2);
  partial_.push_back(0.0);
  for (Index x : log_len) { args_.push_back(x); partial_.push_back(0.0); }
  return id;
}

std::vector<Tape::Index> Tape::cholesky(std::span<const Index> lower_packed,
                                        int n, double base_nugget) {
  const std::size_t m = static_cast<std::size_t>(n) * (n + 1) / 2;
  if (lower_packed.size() != m)
    throw std::invalid_argument("tape cholesky: packed size != n(n+1)/2");
  CholRecord rec;
  rec.n = n;
  rec.base_nugget = base_nugget;
  rec.in_begin = static_cast<std::uint32_t>(chol_args_.size());
  for (Index x : lower_packed) chol_args_.push_back(x);
  std::vector<Index> out;
  out.reserve(m);
  rec.out_begin = static_cast<Index>(kind_.size());
  for (std::size_t i = 0; i < m; ++i) out.push_back(push(OpKind::kCholOut, {}));
  chol_.push_back(std::move(rec));
  return out;
}

void Tape::set_output(Index root) {
  output_ = root;
  has_output_ = true;
}

namespace {

constexpr double kJitterLadder[] = {0.0,  1e-10, 1e-9, 1e-8,
                                    1e-7, 1e-6,  1e-5, 1e-4};

[[noreturn]] void throw_nonfinite(OpKind k, std::size_t idx) {
  std::ostringstream os;
  os << "tape forward: non-finite value at node " << idx << " (kind "
     << op_kind_name(k) << ")";
  throw std::runtime_error(os.str());
}

}  // namespace

double Tape::forward(std::span<const double> leaf_values) {
  if (leaf_values.size() != leaf_ids_.size())
    throw std::invalid_argument("tape forward: wrong number of leaf values");
  if (!has_output_) throw std::logic_error("tape forward: no output set");
  for (std::size_t i = 0; i < leaf_ids_.size(); ++i)
    val_[leaf_ids_[i]] = leaf_values[i];

  const std::size_t n_nodes = kind_.size();
  std::size_t next_chol = 0;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const std::uint32_t a0 = arg_begin_[i];
    const Index* a = args_.data() + a0;
    double* pt = partial_.data() + a0;
    const double* aux = aux_.data() + aux_begin_[i];
    double v = 0.0;
    switch (kind_[i]) {
      case OpKind::kConst: v = aux[0]; break;
      case OpKind::kLeaf: v = val_[i]; break;
      case OpKind::kAdd:
        v = val_[a[0]] + val_[a[1]];
        pt[0] = 1.0; pt[1] = 1.0;
        break;
      case OpKind::kSub:
        v = val_[a[0]] - val_[a[1]];
        pt[0] = 1.0; pt[1] = -1.0;
        break;
      case OpKind::kMul:
        v = val_[a[0]] * val_[a[1]];
        pt[0] = val_[a[1]]; pt[1] = val_[a[0]];
        break;
      case OpKind::kDiv: {
        const double inv = 1.0 / val_[a[1]];
        v = val_[a[0]] * inv;
        pt[0] = inv; pt[1] = -v * inv;
        break;
      }
      case OpKind::kNeg:
        v = -val_[a[0]];
        pt[0] = -1.0;
        break;
      case OpKind::kExp:
        v = std::exp(val_[a[0]]);
        pt[0] = v;
        break;
      case OpKind::kLog:
        v = std::log(val_[a[0]]);
        pt[0] = 1.0 / val_[a[0]];
        break;
      case OpKind::kTanh:
        v = std::tanh(val_[a[0]]);
        pt[0] = 1.0 - v * v;
        break;
      case OpKind::kSin:
        v = std::sin(val_[a[0]]);
        pt[0] = std::cos(val_[a[0]]);
        break;
      case OpKind::kCos:
        v = std::cos(val_[a[0]]);
        pt[0] = -std::sin(val_[a[0]]);
        break;
      case OpKind::kSqrt:
        v = std::sqrt(val_[a[0]]);
        pt[0] = 0.5 / v;
        break;
      case OpKind::kSigmoid: {
        v = 1.0 / (1.0 + std::exp(-val_[a[0]]));
        pt[0] = v * (1.0 - v);
        break;
      }
      case OpKind::kAffine: {
        const std::size_t k = arg_end(i) - a0;
        v = aux[0];
        for (std::size_t j = 0; j < k; ++j) {
          v += aux[1 + j] * val_[a[j]];
          pt[j] = aux[1 + j];
        }
        break;
      }
      case OpKind::kDot: {
        const std::size_t k = (arg_end(i) - a0) / 2;
        for (std::size_t j = 0; j < k; ++j) {
          const double x = val_[a[j]];
          const double y = val_[a[k + j]];
          v += x * y;
          pt[j] = y;
          pt[k + j] = x;
        }
        break;
      }
      case OpKind::kTripleDot: {
        const std::size_t k = (arg_end(i) - a0) / 3;
        for (std::size_t j = 0; j < k; ++j) {
          const double x = val_[a[j]];
          const double y = val_[a[k + j]];
          const double z = val_[a[2 * k + j]];
          v += x * y * z;
          pt[j] = y * z;
          pt[k + j] = x * z;
          pt[2 * k + j] = x * y;
        }
        break;
      }
      case OpKind::kRbf: {
        const std::size_t p = static_cast<std::size_t>(aux[0]);
        const double sf2 = std::exp(val_[a[2 * p]]);
        double q = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          const double d = val_[a[k]] - val_[a[p + k]];
          const double inv_l2 = std::exp(-2.0 * val_[a[2 * p + 1 + k]]);
          q += d * d * inv_l2;
        }
        v = sf2 * std::exp(-0.5 * q);
        for (std::size_t k = 0; k < p; ++k) {
          const double d = val_[a[k]] - val_[a[p + k]];
          const double inv_l2 = std::exp(-2.0 * val_[a[2 * p + 1 + k]]);
          const double g = -v * d * inv_l2;  // d kappa / d za_k
          pt[k] = g;
          pt[p + k] = -g;
          pt[2 * p + 1 + k] = v * d * d * inv_l2;  // d kappa / d log l_k
        }
        pt[2 * p] = v;  // d kappa / d log sf2
        break;
      }
      case OpKind::kCholOut: {
        // Entire factor computed once, when the sweep reaches the block head.
        if (next_chol < chol_.size() && i == chol_[next_chol].out_begin) {
          const CholRecord& rec = chol_[next_chol];
          const int n = rec.n;
          Eigen::MatrixXd K(n, n);
          std::size_t t = rec.in_begin;
          for (int r = 0; r < n; ++r)
            for (int c = 0; c <= r; ++c) {
              const double kv = val_[chol_args_[t++]];
              K(r, c) = kv;
              K(c, r) = kv;
            }
          bool ok = false;
          for (double jit : kJitterLadder) {
            Eigen::MatrixXd Kj = K;
            Kj.diagonal().array() += rec.base_nugget + jit;
            Eigen::LLT<Eigen::MatrixXd> llt(Kj);
            if (llt.info() == Eigen::Success) {
              rec.factor = llt.matrixL();
              rec.jitter_used = jit;
              ok = true;
              break;
            }
          }
          if (!ok)
            throw std::runtime_error(
                "tape forward: Cholesky failed at max jitter 1e-4");
          std::size_t o = 0;
          for (int r = 0; r < n; ++r)
            for (int c = 0; c <= r; ++c)
              val_[rec.out_begin + o++] = rec.factor(r, c);
          ++next_chol;
        }
        v = val_[i];
        break;
      }
    }
    if (!std::isfinite(v)) throw_nonfinite(kind_[i], i);
    val_[i] = v;
  }
  forward_done_ = true;
  return val_[output_];
}

std::vector<double> Tape::reverse() const {
  if (!forward_done_)
    throw std::logic_error("tape reverse: forward() has not been run");
  std::vector<double> adj(kind_.size(), 0.0);
  adj[output_] = 1.0;
  std::size_t next_chol = chol_.size();
  for (std::size_t ip1 = kind_.size(); ip1 > 0; --ip1) {
    const std::size_t i = ip1 - 1;
    if (kind_[i] == OpKind::kCholOut) {
      const CholRecord& rec = chol_[next_chol - 1];
      const int n = rec.n;
      const std::size_t m = static_cast<std::size_t>(n) * (n + 1) / 2;
      if (i == rec.out_begin + m - 1) {
        Mat lbar = Mat::Zero(n, n);
        std::size_t o = 0;
        for (int r = 0; r < n; ++r)
          for (int c = 0; c <= r; ++c) lbar(r, c) = adj[rec.out_begin + o++];
        const Mat kbar = cholesky_pullback(rec.factor, lbar);
        std::size_t t = rec.in_begin;
        for (int r = 0; r < n; ++r)
          for (int c = 0; c <= r; ++c) {
            const Index in = chol_args_[t++];
            adj[in] += (r == c) ? kbar(r, c) : 2.0 * kbar(r, c);
          }
        --next_chol;
        // Skip to the block head; intervening nodes are all kCholOut.
        ip1 = rec.out_begin + 1;
      }
      continue;
    }
    const double g = adj[i];
    if (g == 0.0) continue;
    const std::uint32_t a0 = arg_begin_[i];
    const std::uint32_t a1 = arg_end(i);
    for (std::uint32_t j = a0; j < a1; ++j) adj[args_[j]] += g * partial_[j];
  }
  std::vector<double> out(leaf_ids_.size());
  for (std::size_t i = 0; i < leaf_ids_.size(); ++i) out[i] = adj[leaf_ids_[i]];
  return out;
}

std::vector<double> tape_gradient(Tape& tape, std::span<const double> seeds) {
  tape.forward(seeds);
  return tape.reverse();
}

Mat cholesky_pullback(const Mat& factor, const Mat& factor_adjoint) {
  const auto n = factor.rows();
  if (factor.cols() != n || factor_adjoint.rows() != n ||
      factor_adjoint.cols() != n)
    throw std::invalid_argument("cholesky_pullback: shape mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(factor(i, i) > 0.0))
      throw std::runtime_error(
          "cholesky_pullback: factor diagonal must be strictly positive");

  // Murray (2016): Sbar = 1/2 L^-T (P + P^T) L^-1, P = Phi(L^T Lbar),
  // where Phi keeps the lower triangle and halves the diagonal.
  Mat p = (factor.transpose() * factor_adjoint)
              .triangularView<Eigen::Lower>();
  p.diagonal() *= 0.5;
  Mat m = p + p.transpose();
  Mat y = factor.transpose().triangularView<Eigen::Upper>().solve(m);
  Mat sbar = 0.5 * factor.transpose()
                       .triangularView<Eigen::Upper>()
                       .solve(y.transpose())
                       .transpose();
  return 0.5 * (sbar + sbar.transpose());
}

}  // namespace pidkl::diff
