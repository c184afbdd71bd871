#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#ifndef MFGAN_REAL
#define MFGAN_REAL float
#endif

namespace mfgan {

/// Element type of every tensor. The shipped library is 32-bit; the test-only
/// `mfgan_f64` build recompiles the same sources in double precision so that
/// finite-difference oracles are not swamped by rounding.
using Real = MFGAN_REAL;

using Shape = std::vector<std::size_t>;

/// Dense row-major tensor of rank 1 or 2.
class Tensor {
 public:
  Tensor() : shape_{1}, data_(1, Real{0}) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<Real> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor filled(Shape shape, Real value);
  static Tensor scalar(Real value) { return Tensor({1}, {value}); }
  /// Row-major literal: matrix({{1,2},{3,4}}).
  static Tensor matrix(std::initializer_list<std::initializer_list<Real>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  /// Leading dimension; 1 for vectors.
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.back(); }

  std::span<Real> data() { return data_; }
  std::span<const Real> data() const { return data_; }
  std::vector<Real>& storage() { return data_; }
  const std::vector<Real>& storage() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }
  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  Real operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<Real> row(std::size_t r) { return std::span<Real>(data_).subspan(r * cols(), cols()); }
  std::span<const Real> row(std::size_t r) const {
    return std::span<const Real>(data_).subspan(r * cols(), cols());
  }

  bool all_finite() const;
  void fill(Real value);
  /// this += other (shapes must match).
  void add_inplace(const Tensor& other);

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<Real> data_;
};

std::string shape_string(const Shape& shape);
std::size_t shape_product(const Shape& shape);

/// Plain (untaped) kernels shared by the autodiff ops.
namespace kernels {
/// C = A * B
Tensor matmul(const Tensor& a, const Tensor& b);
/// C = A * B^T
Tensor matmul_bt(const Tensor& a, const Tensor& b);
/// C = A^T * B
Tensor matmul_at(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);
}  // namespace kernels

}  // namespace mfgan
