#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfgan/tensor.hpp"

namespace mfgan {

class Rng;

/// Ordered, named collection of trainable tensors. Insertion order is the
/// canonical order used by optimizers and checkpoints.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  Tensor& value(std::size_t i) { return values_.at(i); }
  const Tensor& value(std::size_t i) const { return values_.at(i); }

  /// Index of `name`, or throws IndexError.
  std::size_t index(const std::string& name) const;
  bool contains(const std::string& name) const { return lookup_.count(name) != 0; }

  /// Total number of scalar entries.
  std::size_t scalar_count() const;

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    return a.names_ == b.names_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Gradients aligned with a ParameterSet. Parameters that never took part in
/// the loss keep an all-zero tensor.
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(const ParameterSet& like);

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_.at(i); }
  const Tensor& operator[](std::size_t i) const { return grads_.at(i); }

  void scale(Real factor);
  void add(const GradientSet& other);
  /// Largest absolute entry across all tensors.
  Real max_abs() const;

 private:
  std::vector<Tensor> grads_;
};

/// Uniform in [-bound, bound].
Tensor uniform_tensor(Shape shape, Real bound, Rng& rng);

}  // namespace mfgan
