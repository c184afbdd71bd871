#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfgan/parameters.hpp"

namespace mfgan {

enum class OptimizerKind { adam, sgd };

OptimizerKind parse_optimizer_kind(const std::string& text);
const char* to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Descent step θ ← θ − update(g). Adam keeps first and second moments per
/// parameter; SGD is stateless.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(const OptimizerConfig& config, const ParameterSet& params);

  void step(ParameterSet& params, const GradientSet& grads);

  const OptimizerConfig& config() const { return config_; }
  std::int64_t steps() const { return steps_; }
  const std::vector<Tensor>& first_moment() const { return m_; }
  const std::vector<Tensor>& second_moment() const { return v_; }
  /// Restores moments and step count (checkpoint loading).
  void restore(std::int64_t steps, std::vector<Tensor> m, std::vector<Tensor> v);

  friend bool operator==(const Optimizer& a, const Optimizer& b) {
    return a.steps_ == b.steps_ && a.m_ == b.m_ && a.v_ == b.v_;
  }

 private:
  OptimizerConfig config_;
  std::int64_t steps_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace mfgan
