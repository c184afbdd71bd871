#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "mfgan/parameters.hpp"
#include "mfgan/rng.hpp"
#include "mfgan/tensor.hpp"

namespace mfgan {

/// Controls dropout: active in `train`, identity in `eval`.
enum class Mode { train, eval };

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the tape is a
/// topological order by construction. A tape supports exactly one backward
/// pass; build a fresh one per forward.
class Tape {
 public:
  /// Receives the node's output gradient and its forward value.
  using BackwardFn = std::function<void(Tape&, const Tensor& grad, const Tensor& out)>;

  /// `record = false` builds values only (no backward closures), for frozen
  /// evaluation such as scoring with a discriminator inside a generator step.
  explicit Tape(Mode mode = Mode::eval, std::uint64_t dropout_seed = 0, bool record = true);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to `set.value(index)`; repeated requests return the same node.
  Var param(const ParameterSet& set, std::size_t index);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  bool training() const { return mode_ == Mode::train; }
  bool recording() const { return record_; }
  Rng& rng() { return rng_; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Gradients of scalar `loss` with respect to every parameter of `wrt`.
  /// Leaves from other parameter sets are treated as constants.
  GradientSet backward(Var loss, const ParameterSet& wrt);

  // Op-authoring interface.
  Var push(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var push(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn fn);
  /// grad[id] += g, skipped for nodes that do not require a gradient.
  void accumulate(std::size_t id, const Tensor& g);
  void accumulate(std::size_t id, Tensor&& g);

 private:
  struct Node {
    Tensor value;
    BackwardFn backward;
    bool requires_grad = false;
    const ParameterSet* owner = nullptr;
    std::size_t param_index = 0;
  };

  Mode mode_;
  bool record_;
  bool consumed_ = false;
  Rng rng_;
  std::deque<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<char> has_grad_;
  std::map<std::pair<const ParameterSet*, std::size_t>, std::size_t> param_cache_;
};

inline const Tensor& Var::value() const { return tape->value(*this); }

// ---- differentiable ops -------------------------------------------------

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_bt(Var a, Var b);
Var add(Var a, Var b);
/// x[m x n] + bias[n], broadcast over rows.
Var add_bias(Var x, Var bias);
Var scale(Var x, Real factor);
/// Elementwise product with a constant tensor of the same shape.
Var mul_const(Var x, const Tensor& weights);
Var relu(Var x);
/// Inverted dropout: survivors scaled by 1/(1-p); identity in eval mode or p == 0.
Var dropout(Var x, Real p);
Var sigmoid(Var x);
/// log(sigmoid(x)), evaluated without overflow.
Var log_sigmoid(Var x);
Var softmax_rows(Var x);
Var log_softmax_rows(Var x);

/// Value written into masked attention logits.
inline constexpr Real kMaskValue = Real(-1e9);
/// Masked entries (mask[i] != 0, row-major over x) are replaced by kMaskValue.
Var masked_fill(Var x, const std::vector<char>& mask);

/// Rows of `table` selected by `ids`; backward scatter-adds into the table.
Var embedding_lookup(Var table, std::span<const std::int32_t> ids);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var concat_cols(std::span<const Var> parts);
Var layer_norm(Var x, Var gamma, Var beta, Real eps = Real(1e-6));

Var sum(Var x);
Var mean(Var x);
/// Vector of x(rows[i], cols[i]).
Var pick(Var x, std::span<const std::size_t> rows, std::span<const std::size_t> cols);

inline Var operator+(Var a, Var b) { return add(a, b); }

// ---- finite differences -------------------------------------------------

using ScalarObjective = std::function<double(const ParameterSet&)>;

/// Central differences (f(θ+ε) − f(θ−ε)) / (x₊ − x₋) per coordinate, where
/// x± are the representable perturbed values.
GradientSet finite_diff_grad(const ScalarObjective& f, const ParameterSet& theta, double eps);

/// max over tensors of ‖a−b‖∞ / max(‖a‖∞, ‖b‖∞); tensors that are zero in
/// both sets (below `floor`) are skipped.
double gradient_relative_error(const GradientSet& a, const GradientSet& b, double floor = 1e-12);

}  // namespace mfgan
