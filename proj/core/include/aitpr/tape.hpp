#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "aitpr/tensor.hpp"

namespace aitpr {

class Tape;

enum class OpKind {
  Leaf,
  MatMul,
  VecMat,
  MatVec,
  Add,
  Mul,
  Scale,
  Tanh,
  Sigmoid,
  Softmax,
  Row,
  Concat,
  Slice,
  Sum,
  NegLogSoftmax,
};

std::string_view op_name(OpKind op);

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  // References stay valid only until the next node is pushed onto the tape.
  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
};

// Dynamic reverse-mode tape. Nodes are appended in evaluation order, so the
// node list is always topologically sorted. One tape per forward/backward
// pass; tapes share nothing and may be used from different threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var parameter(Tensor value) { return push_leaf(std::move(value), true); }
  Var constant(Tensor value) { return push_leaf(std::move(value), false); }

  // Seeds d(output)/d(output) = 1 and accumulates gradients into every node
  // that depends on a parameter. `output` must hold exactly one element.
  void backward(Var output);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  const Tensor& grad(Var v) const;
  OpKind op(Var v) const { return nodes_.at(v.id).op; }
  std::vector<std::size_t> inputs(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Internal: used by the op free functions below.
  Var push(OpKind op, Tensor value, std::size_t a, std::size_t b = kNone, double scalar = 0.0, std::size_t index = 0);
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

 private:
  struct Node {
    OpKind op = OpKind::Leaf;
    std::size_t a = kNone;
    std::size_t b = kNone;
    double scalar = 0.0;
    std::size_t index = 0;
    bool requires_grad = false;
    Tensor value;
    Tensor grad;
  };

  Var push_leaf(Tensor value, bool requires_grad);
  void accumulate(std::size_t id, const Tensor& delta);
  void accumulate_at(std::size_t id, std::size_t offset, std::span<const double> delta);
  void backprop_node(std::size_t id);

  std::vector<Node> nodes_;
  Tensor empty_grad_;
};

// Differentiable ops. All operands must live on the same tape.
Var matmul(Var a, Var b);
Var vecmat(Var x, Var w);   // x^T W : [m] x [m x n] -> [n]
Var matvec(Var m, Var x);   // M x   : [k x n] x [n] -> [k]
Var add(Var a, Var b);
Var mul(Var a, Var b);      // Hadamard product
Var scale(Var a, double s);
Var tanh(Var a);
Var sigmoid(Var a);
Var softmax(Var a);
Var row(Var matrix, std::size_t r);
Var concat(Var a, Var b);
Var slice(Var a, std::size_t begin, std::size_t length);
Var sum(Var a);
Var neg_log_softmax(Var logits, std::size_t target);  // -log softmax(logits)[target]
Var elementwise(ElementwiseOp op, Var a, Var b = Var{});

inline Var operator+(Var a, Var b) { return add(a, b); }

}  // namespace aitpr
