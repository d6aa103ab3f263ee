// Copyright 2026 The Modbot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MODBOT_TAPE_HPP_
#define MODBOT_TAPE_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "modbot/tensor.hpp"

namespace modbot {

// Raised when an op produces NaN/Inf in its output, or when backward finds
// a non-finite gradient. Carries the name of the offending op.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& where, const std::string& msg)
      : std::runtime_error(msg), op(where) {}
  std::string op;
};

enum class Op : uint8_t {
  kConst,
  kParam,
  kMatMul,
  kAdd,
  kAddRow,
  kAddScalar,
  kMul,
  kMulRow,
  kMulScalar,
  kTanh,
  kSigmoid,
  kExp,
  kLog,
  kSquare,
  kSoftplus,
  kClamp,
  kConcat,
  kSlice,
  kSumCols,
  kSumAll,
  kMeanAll,
};

const char* op_name(Op op);

using NodeId = int32_t;

// Bump allocator for node value/gradient buffers. Slabs persist across
// reset() so steady-state training does no heap allocation per update.
class Arena {
 public:
  explicit Arena(size_t slab_doubles = size_t{1} << 22) : slab_doubles_(slab_doubles) {}

  double* alloc(size_t n);
  void reset();
  size_t bytes_reserved() const;

 private:
  size_t slab_doubles_;
  std::vector<std::unique_ptr<double[]>> slabs_;
  std::vector<size_t> slab_size_;
  size_t cur_ = 0;
  size_t off_ = 0;
};

// Reverse-mode autodiff over an ordered record of primitive ops. Values are
// computed eagerly as ops are recorded; backward() runs one reverse sweep in
// which every reachable node is visited exactly once, in a fixed order, so
// gradients are bit-reproducible. Every op's output is checked finite.
//
// All node tensors are logically [rows, cols]; a scalar is [1, 1].
class Tape {
 public:
  Tape() = default;

  // Drops all nodes and rewinds the arena; previously returned NodeIds
  // become invalid. Parameter bindings must be re-established.
  void reset();

  size_t node_count() const { return nodes_.size(); }

  // ---- leaves ----
  NodeId constant(const Tensor& t);
  NodeId constant(int rows, int cols, const double* data);
  NodeId zeros(int rows, int cols);
  // References external storage (no copy). If trainable, backward will
  // produce a gradient for it; frozen parameters still pass gradients
  // through to their co-inputs but get none themselves.
  NodeId param(Tensor& t, bool trainable = true);

  // ---- primitive ops ----
  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId add_row(NodeId a, NodeId row);  // [m,n] + [1,n], row broadcast
  NodeId add_scalar(NodeId a, double c);
  NodeId mul(NodeId a, NodeId b);
  NodeId mul_row(NodeId a, NodeId row);
  NodeId mul_scalar(NodeId a, double c);
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId square(NodeId a);
  NodeId softplus(NodeId a);
  // Clamps values to [lo, hi]; the gradient passes through unchanged
  // (straight-through) including at and beyond the boundaries.
  NodeId clamp(NodeId a, double lo, double hi);
  NodeId concat(NodeId a, NodeId b);               // along columns
  NodeId slice(NodeId a, int col0, int ncols);     // column range
  NodeId sum_cols(NodeId a);                       // [m,n] -> [m,1]
  NodeId sum_all(NodeId a);                        // -> [1,1]
  NodeId mean_all(NodeId a);                       // -> [1,1]

  // ---- distribution helpers (composed from the primitives above) ----
  // Diagonal-Gaussian log density, summed over columns: [m,1] per sample.
  NodeId gaussian_log_prob(NodeId mean, NodeId log_std, NodeId value);
  // Diagonal-Gaussian entropy per sample: [m,1].
  NodeId gaussian_entropy(NodeId log_std);
  // mean + exp(log_std) * noise; gradients flow to mean and log_std only.
  NodeId reparam_sample(NodeId mean, NodeId log_std, NodeId noise);

  // Backpropagates from a scalar output. Throws NonFiniteError naming the
  // op if the output or any parameter gradient is non-finite.
  void backward(NodeId output);

  // ---- access ----
  int rows(NodeId id) const { return nodes_[id].rows; }
  int cols(NodeId id) const { return nodes_[id].cols; }
  std::span<const double> value(NodeId id) const;
  std::span<const double> grad(NodeId id) const;  // empty if not reached
  double scalar(NodeId id) const;
  Tensor value_tensor(NodeId id) const;

  // Test fixture: multiplies the named op's input-gradient contributions by
  // a wrong factor so finite-difference verification must flag that op.
  void corrupt_backward_for_testing(Op op) { corrupt_ = op; corrupt_active_ = true; }

 private:
  struct Node {
    Op op;
    bool needs_grad;
    bool grad_set;
    NodeId a, b;
    int32_t rows, cols;
    double* val;
    double* grad;
    double p0, p1;   // scalar attrs: clamp bounds / scalar operand
    int32_t i0, i1;  // slice col0 / ncols
  };

  NodeId push(Node n);
  NodeId unary(Op op, NodeId a);
  void check_finite_value(NodeId id) const;
  void check_same_shape(const char* who, NodeId a, NodeId b) const;
  int64_t numel(const Node& n) const {
    return static_cast<int64_t>(n.rows) * n.cols;
  }
  void backprop_node(NodeId id);
  // Adds src into dst's grad buffer (or assigns on first write).
  void accumulate(NodeId dst, const double* src);

  std::vector<Node> nodes_;
  Arena arena_;
  std::vector<uint8_t> needed_;
  Op corrupt_ = Op::kConst;
  bool corrupt_active_ = false;
};

}  // namespace modbot

#endif  // MODBOT_TAPE_HPP_
