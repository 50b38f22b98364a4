#pragma once

// Reverse-mode tape over network parameters. Operations come in two layers:
//   * block ops whose operands are whole batches of jets (affine maps with
//     trainable weights, elementwise activations);
//   * scalar ops (Var) assembled from jet components and parameters, used to
//     write the loss.
// backward() sweeps the scalar section first, scattering adjoints into jet
// components, then sweeps the block ops into parameter gradients.
//
// A Tape is single-owner and must stay on one thread.

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/jet.hpp"
#include "impinn/kernels.hpp"

namespace impinn::ad {

class Tape;

// Handle to a scalar node on a Tape (or a free constant when id < 0).
class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT: implicit by design

  double value() const { return value_; }
  bool is_constant() const { return id_ < 0; }

 private:
  friend class Tape;
  Var(Tape* tape, std::int32_t id, double value)
      : tape_(tape), id_(id), value_(value) {}

  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
  double value_ = 0.0;

  friend Var operator+(const Var& a, const Var& b);
  friend Var operator-(const Var& a, const Var& b);
  friend Var operator*(const Var& a, const Var& b);
  friend Var operator-(const Var& a);
};

struct JetBlock {
  int rows = 0;
  std::size_t points = 0;
  int stride = kJetWidth;
  std::size_t ld = 0;  // padded column count
  bool trainable_path = false;
  std::vector<double> data;
  std::vector<double> adj;

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * ld; }
  const double* row(int r) const {
    return data.data() + static_cast<std::size_t>(r) * ld;
  }
  double at(int r, std::size_t p, int coeff) const {
    return data[static_cast<std::size_t>(r) * ld + p * stride + coeff];
  }
};

class Tape {
 public:
  explicit Tape(std::span<const double> params) : params_(params) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t num_params() const { return params_.size(); }
  std::span<const double> params() const { return params_; }

  // ---- block section -----------------------------------------------------

  // A constant input block (no gradient flows into it). `data` must be
  // rows x padded_columns(points * stride).
  int leaf_block(int rows, std::size_t points, int stride,
                 std::vector<double> data) {
    JetBlock b;
    b.rows = rows;
    b.points = points;
    b.stride = stride;
    b.ld = kernels::padded_columns(points * static_cast<std::size_t>(stride));
    assert(data.size() == static_cast<std::size_t>(rows) * b.ld);
    b.data = std::move(data);
    blocks_.push_back(std::move(b));
    return static_cast<int>(blocks_.size()) - 1;
  }

  // out = W in + b with W (out_rows x in.rows, row-major) at
  // params[weight_offset] and b at params[bias_offset].
  int affine(int in, std::size_t weight_offset, std::size_t bias_offset,
             int out_rows) {
    const JetBlock& x = blocks_[in];
    JetBlock y = like(x, out_rows);
    y.trainable_path = true;
    kernels::affine_forward(params_.data() + weight_offset,
                            params_.data() + bias_offset, out_rows, x.rows,
                            x.data.data(), x.ld, x.stride, y.data.data());
    blocks_.push_back(std::move(y));
    ops_.push_back({BlockOp::Affine, in, static_cast<int>(blocks_.size()) - 1,
                    kernels::Activation::Tanh, weight_offset, bias_offset});
    return static_cast<int>(blocks_.size()) - 1;
  }

  int activate(int in, kernels::Activation act) {
    const JetBlock& x = blocks_[in];
    JetBlock y = like(x, x.rows);
    y.trainable_path = x.trainable_path;
    kernels::activate_forward(act, x.rows, x.points, x.stride, x.data.data(),
                              x.ld, y.data.data());
    blocks_.push_back(std::move(y));
    ops_.push_back(
        {BlockOp::Activate, in, static_cast<int>(blocks_.size()) - 1, act, 0, 0});
    return static_cast<int>(blocks_.size()) - 1;
  }

  const JetBlock& block(int id) const { return blocks_[id]; }

  // ---- scalar section ----------------------------------------------------

  Var parameter(std::size_t index) {
    return make_leaf(Leaf{Leaf::Param, -1, index}, params_[index]);
  }

  Var component(int block_id, int row, std::size_t point, int coeff) {
    const JetBlock& b = blocks_[block_id];
    const std::size_t offset =
        static_cast<std::size_t>(row) * b.ld + point * b.stride + coeff;
    if (!b.trainable_path) return Var(b.data[offset]);
    return make_leaf(Leaf{Leaf::Component, block_id, offset}, b.data[offset]);
  }

  // Jet of (row, point) as tape scalars. Value-only blocks give zero
  // derivative entries.
  BasicJet2<Var> jet(int block_id, int row, std::size_t point) {
    BasicJet2<Var> j;
    j.value = component(block_id, row, point, 0);
    if (blocks_[block_id].stride == kJetWidth) {
      for (int i = 0; i < kInputs; ++i) {
        j.grad[i] = component(block_id, row, point, 1 + i);
      }
      for (int k = 0; k < kHessEntries; ++k) {
        j.hess[k] = component(block_id, row, point, 1 + kInputs + k);
      }
    }
    return j;
  }

  std::size_t num_nodes() const { return nodes_.size(); }

  // Accumulates d(sum_s seed_s * var_s)/d(params) into `grad`.
  void backward(std::span<const std::pair<Var, double>> seeds,
                std::span<double> grad) {
    if (grad.size() != params_.size()) {
      throw Error(ErrorKind::Validation, "gradient buffer size mismatch");
    }
    std::vector<double> adj(nodes_.size(), 0.0);
    for (const auto& [var, seed] : seeds) {
      if (!std::isfinite(var.value())) {
        throw Error(ErrorKind::NonFiniteLoss,
                    "loss value is not finite; refusing to differentiate");
      }
      if (var.id_ >= 0) {
        assert(var.tape_ == this);
        adj[static_cast<std::size_t>(var.id_)] += seed;
      }
    }
    for (JetBlock& b : blocks_) {
      if (b.trainable_path) b.adj.assign(b.data.size(), 0.0);
    }

    for (std::size_t n = nodes_.size(); n-- > 0;) {
      const double a = adj[n];
      if (a == 0.0) continue;
      const Node& node = nodes_[n];
      if (node.leaf >= 0) {
        const Leaf& leaf = leaves_[static_cast<std::size_t>(node.leaf)];
        if (leaf.kind == Leaf::Param) {
          grad[leaf.offset] += a;
        } else {
          blocks_[leaf.block].adj[leaf.offset] += a;
        }
        continue;
      }
      if (node.a >= 0) adj[static_cast<std::size_t>(node.a)] += node.da * a;
      if (node.b >= 0) adj[static_cast<std::size_t>(node.b)] += node.db * a;
    }

    for (std::size_t k = ops_.size(); k-- > 0;) {
      const BlockOp& op = ops_[k];
      JetBlock& x = blocks_[op.in];
      JetBlock& y = blocks_[op.out];
      if (op.kind == BlockOp::Activate) {
        if (!x.trainable_path) continue;
        kernels::activate_backward(op.act, x.rows, x.points, x.stride,
                                   x.data.data(), y.adj.data(), x.ld,
                                   x.adj.data());
        continue;
      }
      affine_backward(op, x, y, grad);
    }
  }

  void backward(const Var& root, std::span<double> grad) {
    const std::pair<Var, double> seed{root, 1.0};
    backward(std::span<const std::pair<Var, double>>(&seed, 1), grad);
  }

  // Used by the Var operators.
  Var push(std::int32_t a, double da, std::int32_t b, double db,
           double value) {
    nodes_.push_back({a, b, da, db, -1});
    return Var(this, static_cast<std::int32_t>(nodes_.size()) - 1, value);
  }

 private:
  struct Node {
    std::int32_t a, b;
    double da, db;
    std::int32_t leaf;
  };
  struct Leaf {
    enum Kind { Param, Component } kind;
    int block;
    std::size_t offset;
  };
  struct BlockOp {
    enum Kind { Affine, Activate } kind;
    int in, out;
    kernels::Activation act;
    std::size_t weight_offset, bias_offset;
  };

  static JetBlock like(const JetBlock& x, int rows) {
    JetBlock y;
    y.rows = rows;
    y.points = x.points;
    y.stride = x.stride;
    y.ld = x.ld;
    y.data.assign(static_cast<std::size_t>(rows) * x.ld, 0.0);
    return y;
  }

  Var make_leaf(Leaf leaf, double value) {
    leaves_.push_back(leaf);
    nodes_.push_back({-1, -1, 0.0, 0.0,
                      static_cast<std::int32_t>(leaves_.size()) - 1});
    return Var(this, static_cast<std::int32_t>(nodes_.size()) - 1, value);
  }

  void affine_backward(const BlockOp& op, JetBlock& x, const JetBlock& y,
                       std::span<double> grad) {
    using RowMat =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Index out = y.rows, in = x.rows;
    const auto ld = static_cast<Eigen::Index>(x.ld);
    Eigen::Map<const RowMat> W(params_.data() + op.weight_offset, out, in);
    Eigen::Map<const RowMat> X(x.data.data(), in, ld);
    Eigen::Map<const RowMat> Ybar(y.adj.data(), out, ld);
    Eigen::Map<RowMat> dW(grad.data() + op.weight_offset, out, in);
    dW.noalias() += Ybar * X.transpose();
    for (Eigen::Index r = 0; r < out; ++r) {
      const double* yb = y.adj.data() + r * ld;
      double s = 0.0;
      for (std::size_t p = 0; p < y.points; ++p) s += yb[p * y.stride];
      grad[op.bias_offset + static_cast<std::size_t>(r)] += s;
    }
    if (x.trainable_path) {
      Eigen::Map<RowMat> Xbar(x.adj.data(), in, ld);
      Xbar.noalias() += W.transpose() * Ybar;
    }
  }

  std::span<const double> params_;
  std::vector<JetBlock> blocks_;
  std::vector<BlockOp> ops_;
  std::vector<Node> nodes_;
  std::vector<Leaf> leaves_;
};

inline Var operator+(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.value_ + b.value_);
  Tape* t = a.tape_ ? a.tape_ : b.tape_;
  return t->push(a.id_, 1.0, b.id_, 1.0, a.value_ + b.value_);
}

inline Var operator-(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.value_ - b.value_);
  Tape* t = a.tape_ ? a.tape_ : b.tape_;
  return t->push(a.id_, 1.0, b.id_, -1.0, a.value_ - b.value_);
}

inline Var operator*(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.value_ * b.value_);
  Tape* t = a.tape_ ? a.tape_ : b.tape_;
  return t->push(a.id_, b.value_, b.id_, a.value_, a.value_ * b.value_);
}

inline Var operator-(const Var& a) {
  if (a.is_constant()) return Var(-a.value_);
  return a.tape_->push(a.id_, -1.0, -1, 0.0, -a.value_);
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline Var sqr(const Var& a) { return a * a; }
inline double sqr(double a) { return a * a; }

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

}  // namespace impinn::ad
