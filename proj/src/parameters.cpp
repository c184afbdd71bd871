#include "mfgan/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "mfgan/errors.hpp"
#include "mfgan/rng.hpp"

namespace mfgan {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  if (lookup_.count(name)) throw ContractError("duplicate parameter name: " + name);
  lookup_.emplace(name, values_.size());
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::size_t ParameterSet::index(const std::string& name) const {
  auto it = lookup_.find(name);
  if (it == lookup_.end()) throw IndexError("unknown parameter: " + name);
  return it->second;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

GradientSet::GradientSet(const ParameterSet& like) {
  grads_.reserve(like.size());
  for (std::size_t i = 0; i < like.size(); ++i) grads_.emplace_back(like.value(i).shape());
}

void GradientSet::scale(Real factor) {
  for (auto& g : grads_)
    for (auto& v : g.data()) v *= factor;
}

void GradientSet::add(const GradientSet& other) {
  if (other.size() != size()) throw ShapeError("GradientSet::add: size mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i].add_inplace(other.grads_[i]);
}

Real GradientSet::max_abs() const {
  Real m = 0;
  for (const auto& g : grads_)
    for (auto v : g.data()) m = std::max(m, std::abs(v));
  return m;
}

Tensor uniform_tensor(Shape shape, Real bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<Real>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace mfgan
