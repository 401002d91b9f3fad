#include "aitpr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "aitpr/errors.hpp"

namespace aitpr {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {

void check_shape(const Shape& shape) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.shape());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <typename F>
Tensor zip(const char* op, const Tensor& a, const Tensor& b, F f) {
  require_same_shape(op, a, b);
  Tensor out(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = f(x[i], y[i]);
  return out;
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_to_string(shape_));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
  return out;
}

Tensor Tensor::row(std::size_t r) const {
  auto s = row_span(r);
  return Tensor::vector(std::vector<double>(s.begin(), s.end()));
}

std::span<const double> Tensor::row_span(std::size_t r) const {
  if (rank() != 2) throw DimensionError("row(): expected a matrix, got " + shape_to_string(shape_));
  if (r >= shape_[0]) throw DimensionError("row(): index " + std::to_string(r) + " out of range for " + shape_to_string(shape_));
  return std::span<const double>(data_).subspan(r * shape_[1], shape_[1]);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_) return false;
  if (a.data_.size() != b.data_.size()) return false;
  return a.data_.empty() ||
         std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) == 0;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_to_string(a.shape()) + " by " + shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a.at(i, p);
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += aip * b.at(p, j);
    }
  }
  return out;
}

Tensor vecmat(const Tensor& x, const Tensor& w) {
  if (x.rank() != 1 || w.rank() != 2 || x.dim(0) != w.dim(0)) {
    throw DimensionError("vecmat: cannot multiply " + shape_to_string(x.shape()) + " by " + shape_to_string(w.shape()));
  }
  const std::size_t m = w.dim(0), n = w.dim(1);
  Tensor out({n});
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = x[i];
    auto row = w.row_span(i);
    for (std::size_t j = 0; j < n; ++j) out[j] += xi * row[j];
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return zip("add", a, b, [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip("sub", a, b, [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return zip("mul", a, b, [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double s) {
  return map(a, [s](double x) { return x * s; });
}

Tensor tanh(const Tensor& a) {
  return map(a, [](double x) { return std::tanh(x); });
}

Tensor sigmoid(const Tensor& a) { return map(a, sigmoid_scalar); }

Tensor softmax(const Tensor& a) {
  if (a.empty()) throw DimensionError("softmax: empty input");
  if (a.rank() != 1) throw DimensionError("softmax: expected a vector, got " + shape_to_string(a.shape()));
  const auto values = a.data();
  const double peak = *std::max_element(values.begin(), values.end());
  Tensor out(a.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - peak);
    total += out[i];
  }
  for (std::size_t i = 0; i < values.size(); ++i) out[i] /= total;
  return out;
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw DimensionError("transpose: expected a matrix, got " + shape_to_string(a.shape()));
  Tensor out({a.dim(1), a.dim(0)});
  for (std::size_t i = 0; i < a.dim(0); ++i)
    for (std::size_t j = 0; j < a.dim(1); ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Tensor mean_rows(const Tensor& rows) {
  if (rows.rank() != 2) throw DimensionError("mean_rows: expected a matrix, got " + shape_to_string(rows.shape()));
  Tensor out({rows.dim(1)});
  for (std::size_t r = 0; r < rows.dim(0); ++r) {
    auto row = rows.row_span(r);
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
  }
  return scale(out, 1.0 / static_cast<double>(rows.dim(0)));
}

double sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return total;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape("max_abs_diff", a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  const std::size_t n = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * n);
  for (const auto& r : rows) {
    if (r.rank() != 1 || r.size() != n) {
      throw DimensionError("stack_rows: row shape " + shape_to_string(r.shape()) + " differs from [" + std::to_string(n) + "]");
    }
    values.insert(values.end(), r.data().begin(), r.data().end());
  }
  return Tensor({rows.size(), n}, std::move(values));
}

Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor* b) {
  switch (op) {
    case ElementwiseOp::Add:
    case ElementwiseOp::Mul:
      if (b == nullptr) throw DimensionError("elementwise: binary op requires a second operand");
      return op == ElementwiseOp::Add ? add(a, *b) : mul(a, *b);
    case ElementwiseOp::Tanh:
      return tanh(a);
    case ElementwiseOp::Sigmoid:
      return sigmoid(a);
  }
  return a;
}

}  // namespace aitpr
