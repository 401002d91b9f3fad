#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace aitpr {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

// Dense row-major array of doubles. Vectors are rank 1, matrices rank 2.
// A Tensor is a plain value: copies are deep and independent.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  // Row r of a matrix as a rank-1 tensor.
  Tensor row(std::size_t r) const;
  std::span<const double> row_span(std::size_t r) const;

  bool all_finite() const;

  // Bitwise equality of shape and every element.
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Plain (non-differentiable) kernels. The tape reuses these for its forward pass.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor vecmat(const Tensor& x, const Tensor& w);  // x^T W, x:[m], W:[m x n] -> [n]
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softmax(const Tensor& a);
Tensor transpose(const Tensor& a);
Tensor mean_rows(const Tensor& rows);  // [k x n] -> [n]
double sum(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);
double dot(std::span<const double> a, std::span<const double> b);

// Stacks equal-length vectors into a [k x n] matrix.
Tensor stack_rows(std::span<const Tensor> rows);

enum class ElementwiseOp { Add, Mul, Tanh, Sigmoid };
Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor* b = nullptr);

}  // namespace aitpr
