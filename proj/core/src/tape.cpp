#include "aitpr/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aitpr/errors.hpp"

namespace aitpr {

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::Leaf: return "leaf";
    case OpKind::MatMul: return "matmul";
    case OpKind::VecMat: return "vecmat";
    case OpKind::MatVec: return "matvec";
    case OpKind::Add: return "add";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Softmax: return "softmax";
    case OpKind::Row: return "row";
    case OpKind::Concat: return "concat";
    case OpKind::Slice: return "slice";
    case OpKind::Sum: return "sum";
    case OpKind::NegLogSoftmax: return "neg_log_softmax";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape->value(*this); }
const Tensor& Var::grad() const { return tape->grad(*this); }

Var Tape::push_leaf(Tensor value, bool requires_grad) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value in leaf node " + std::to_string(nodes_.size()));
  }
  Node node;
  node.op = OpKind::Leaf;
  node.requires_grad = requires_grad;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::push(OpKind op, Tensor value, std::size_t a, std::size_t b, double scalar, std::size_t index) {
  const std::size_t id = nodes_.size();
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced at node " + std::to_string(id) + " (" + std::string(op_name(op)) + ")");
  }
  Node node;
  node.op = op;
  node.a = a;
  node.b = b;
  node.scalar = scalar;
  node.index = index;
  node.requires_grad = (a != kNone && nodes_[a].requires_grad) || (b != kNone && nodes_[b].requires_grad);
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, id};
}

const Tensor& Tape::grad(Var v) const {
  const auto& node = nodes_.at(v.id);
  return node.grad.empty() ? empty_grad_ : node.grad;
}

std::vector<std::size_t> Tape::inputs(Var v) const {
  const auto& node = nodes_.at(v.id);
  std::vector<std::size_t> out;
  if (node.a != kNone) out.push_back(node.a);
  if (node.b != kNone) out.push_back(node.b);
  return out;
}

void Tape::accumulate(std::size_t id, const Tensor& delta) {
  auto& g = nodes_[id].grad;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

void Tape::accumulate_at(std::size_t id, std::size_t offset, std::span<const double> delta) {
  auto& g = nodes_[id].grad;
  for (std::size_t i = 0; i < delta.size(); ++i) g[offset + i] += delta[i];
}

void Tape::backward(Var output) {
  if (output.tape != this) throw DimensionError("backward: output belongs to another tape");
  if (nodes_.at(output.id).value.size() != 1) {
    throw DimensionError("backward: output must be scalar, got " + shape_to_string(nodes_[output.id].value.shape()));
  }
  for (std::size_t i = 0; i <= output.id; ++i) {
    auto& node = nodes_[i];
    if (node.requires_grad) node.grad = Tensor(node.value.shape(), 0.0);
  }
  if (!nodes_[output.id].requires_grad) return;
  nodes_[output.id].grad[0] = 1.0;
  for (std::size_t i = output.id + 1; i-- > 0;) {
    if (nodes_[i].requires_grad && nodes_[i].op != OpKind::Leaf) backprop_node(i);
  }
}

void Tape::backprop_node(std::size_t id) {
  // Copy what we need: accumulate() may touch other nodes but never this one.
  const Node& node = nodes_[id];
  const Tensor& g = node.grad;
  const std::size_t a = node.a;
  const std::size_t b = node.b;
  const bool ga = a != kNone && nodes_[a].requires_grad;
  const bool gb = b != kNone && nodes_[b].requires_grad;

  switch (node.op) {
    case OpKind::Leaf:
      break;
    case OpKind::MatMul: {
      const Tensor& x = nodes_[a].value;
      const Tensor& y = nodes_[b].value;
      if (ga) accumulate(a, aitpr::matmul(g, transpose(y)));
      if (gb) accumulate(b, aitpr::matmul(transpose(x), g));
      break;
    }
    case OpKind::VecMat: {
      // out_j = sum_i x_i W_ij
      const Tensor& x = nodes_[a].value;
      const Tensor& w = nodes_[b].value;
      const std::size_t m = w.dim(0), n = w.dim(1);
      if (ga) {
        Tensor dx({m});
        for (std::size_t i = 0; i < m; ++i) dx[i] = dot(w.row_span(i), g.data());
        accumulate(a, dx);
      }
      if (gb) {
        auto& dw = nodes_[b].grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) dw.at(i, j) += x[i] * g[j];
      }
      break;
    }
    case OpKind::MatVec: {
      // out_i = sum_j M_ij x_j
      const Tensor& m = nodes_[a].value;
      const Tensor& x = nodes_[b].value;
      if (ga) {
        auto& dm = nodes_[a].grad;
        for (std::size_t i = 0; i < m.dim(0); ++i)
          for (std::size_t j = 0; j < m.dim(1); ++j) dm.at(i, j) += g[i] * x[j];
      }
      if (gb) accumulate(b, aitpr::vecmat(g, m));
      break;
    }
    case OpKind::Add:
      if (ga) accumulate(a, g);
      if (gb) accumulate(b, g);
      break;
    case OpKind::Mul:
      if (ga) accumulate(a, aitpr::mul(g, nodes_[b].value));
      if (gb) accumulate(b, aitpr::mul(g, nodes_[a].value));
      break;
    case OpKind::Scale:
      if (ga) accumulate(a, aitpr::scale(g, node.scalar));
      break;
    case OpKind::Tanh:
      if (ga) {
        Tensor d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] * (1.0 - node.value[i] * node.value[i]);
        accumulate(a, d);
      }
      break;
    case OpKind::Sigmoid:
      if (ga) {
        Tensor d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] * node.value[i] * (1.0 - node.value[i]);
        accumulate(a, d);
      }
      break;
    case OpKind::Softmax:
      if (ga) {
        // d_in = y * (g - <g, y>)
        const double gy = dot(g.data(), node.value.data());
        Tensor d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = node.value[i] * (g[i] - gy);
        accumulate(a, d);
      }
      break;
    case OpKind::Row:
      if (ga) accumulate_at(a, node.index * nodes_[a].value.dim(1), g.data());
      break;
    case OpKind::Concat: {
      const std::size_t na = nodes_[a].value.size();
      if (ga) accumulate(a, Tensor::vector(std::vector<double>(g.data().begin(), g.data().begin() + na)));
      if (gb) accumulate(b, Tensor::vector(std::vector<double>(g.data().begin() + na, g.data().end())));
      break;
    }
    case OpKind::Slice:
      if (ga) accumulate_at(a, node.index, g.data());
      break;
    case OpKind::Sum:
      if (ga) accumulate(a, Tensor(nodes_[a].value.shape(), g[0]));
      break;
    case OpKind::NegLogSoftmax:
      if (ga) {
        Tensor d = aitpr::softmax(nodes_[a].value);
        d[node.index] -= 1.0;
        accumulate(a, aitpr::scale(d, g[0]));
      }
      break;
  }
}

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) throw DimensionError(std::string(op) + ": operands live on different tapes");
  return *a.tape;
}

Tape& tape_of(Var a, const char* op) {
  if (a.tape == nullptr) throw DimensionError(std::string(op) + ": operand is not bound to a tape");
  return *a.tape;
}

}  // namespace

Var matmul(Var a, Var b) {
  auto& t = same_tape(a, b, "matmul");
  return t.push(OpKind::MatMul, aitpr::matmul(a.value(), b.value()), a.id, b.id);
}

Var vecmat(Var x, Var w) {
  auto& t = same_tape(x, w, "vecmat");
  return t.push(OpKind::VecMat, aitpr::vecmat(x.value(), w.value()), x.id, w.id);
}

Var matvec(Var m, Var x) {
  auto& t = same_tape(m, x, "matvec");
  const Tensor& mv = m.value();
  const Tensor& xv = x.value();
  if (mv.rank() != 2 || xv.rank() != 1 || mv.dim(1) != xv.dim(0)) {
    throw DimensionError("matvec: cannot multiply " + shape_to_string(mv.shape()) + " by " + shape_to_string(xv.shape()));
  }
  Tensor out({mv.dim(0)});
  for (std::size_t i = 0; i < mv.dim(0); ++i) out[i] = dot(mv.row_span(i), xv.data());
  return t.push(OpKind::MatVec, std::move(out), m.id, x.id);
}

Var add(Var a, Var b) {
  auto& t = same_tape(a, b, "add");
  return t.push(OpKind::Add, aitpr::add(a.value(), b.value()), a.id, b.id);
}

Var mul(Var a, Var b) {
  auto& t = same_tape(a, b, "mul");
  return t.push(OpKind::Mul, aitpr::mul(a.value(), b.value()), a.id, b.id);
}

Var scale(Var a, double s) {
  auto& t = tape_of(a, "scale");
  return t.push(OpKind::Scale, aitpr::scale(a.value(), s), a.id, Tape::kNone, s);
}

Var tanh(Var a) {
  auto& t = tape_of(a, "tanh");
  return t.push(OpKind::Tanh, aitpr::tanh(a.value()), a.id);
}

Var sigmoid(Var a) {
  auto& t = tape_of(a, "sigmoid");
  return t.push(OpKind::Sigmoid, aitpr::sigmoid(a.value()), a.id);
}

Var softmax(Var a) {
  auto& t = tape_of(a, "softmax");
  return t.push(OpKind::Softmax, aitpr::softmax(a.value()), a.id);
}

Var row(Var matrix, std::size_t r) {
  auto& t = tape_of(matrix, "row");
  return t.push(OpKind::Row, matrix.value().row(r), matrix.id, Tape::kNone, 0.0, r);
}

Var concat(Var a, Var b) {
  auto& t = same_tape(a, b, "concat");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.rank() != 1 || y.rank() != 1) {
    throw DimensionError("concat: expected vectors, got " + shape_to_string(x.shape()) + " and " + shape_to_string(y.shape()));
  }
  std::vector<double> values(x.data().begin(), x.data().end());
  values.insert(values.end(), y.data().begin(), y.data().end());
  return t.push(OpKind::Concat, Tensor::vector(std::move(values)), a.id, b.id);
}

Var slice(Var a, std::size_t begin, std::size_t length) {
  auto& t = tape_of(a, "slice");
  const Tensor& x = a.value();
  if (x.rank() != 1 || length == 0 || begin + length > x.size()) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                         ") invalid for " + shape_to_string(x.shape()));
  }
  std::vector<double> values(x.data().begin() + static_cast<std::ptrdiff_t>(begin),
                             x.data().begin() + static_cast<std::ptrdiff_t>(begin + length));
  return t.push(OpKind::Slice, Tensor::vector(std::move(values)), a.id, Tape::kNone, 0.0, begin);
}

Var sum(Var a) {
  auto& t = tape_of(a, "sum");
  return t.push(OpKind::Sum, Tensor::vector({aitpr::sum(a.value())}), a.id);
}

Var neg_log_softmax(Var logits, std::size_t target) {
  auto& t = tape_of(logits, "neg_log_softmax");
  const Tensor& z = logits.value();
  if (z.rank() != 1 || target >= z.size()) {
    throw DimensionError("neg_log_softmax: target " + std::to_string(target) + " out of range for " + shape_to_string(z.shape()));
  }
  const auto values = z.data();
  const double peak = *std::max_element(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += std::exp(v - peak);
  const double loss = std::log(total) + peak - values[target];
  return t.push(OpKind::NegLogSoftmax, Tensor::vector({loss}), logits.id, Tape::kNone, 0.0, target);
}

Var elementwise(ElementwiseOp op, Var a, Var b) {
  switch (op) {
    case ElementwiseOp::Add: return add(a, b);
    case ElementwiseOp::Mul: return mul(a, b);
    case ElementwiseOp::Tanh: return tanh(a);
    case ElementwiseOp::Sigmoid: return sigmoid(a);
  }
  return a;
}

}  // namespace aitpr
