#include "mfgan/optimizer.hpp"

#include <cmath>

#include "mfgan/errors.hpp"

namespace mfgan {

OptimizerKind parse_optimizer_kind(const std::string& text) {
  if (text == "adam") return OptimizerKind::adam;
  if (text == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer '" + text + "' (expected adam or sgd)");
}

const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

Optimizer::Optimizer(const OptimizerConfig& config, const ParameterSet& params) : config_(config) {
  if (!(config.lr > 0) || !std::isfinite(config.lr)) throw ConfigError("learning rate must be positive");
  if (config.kind == OptimizerKind::adam) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.push_back(Tensor::zeros(params.value(i).shape()));
      v_.push_back(Tensor::zeros(params.value(i).shape()));
    }
  }
}

void Optimizer::restore(std::int64_t steps, std::vector<Tensor> m, std::vector<Tensor> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw CheckpointError("optimizer state size mismatch");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].shape() != m_[i].shape() || v[i].shape() != v_[i].shape())
      throw CheckpointError("optimizer moment shape mismatch");
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

void Optimizer::step(ParameterSet& params, const GradientSet& grads) {
  if (grads.size() != params.size()) throw ShapeError("optimizer: gradient count mismatch");
  ++steps_;
  if (config_.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params.value(i).storage();
      const auto& g = grads[i].storage();
      for (std::size_t k = 0; k < p.size(); ++k)
        p[k] = static_cast<Real>(static_cast<double>(p[k]) - config_.lr * static_cast<double>(g[k]));
    }
    return;
  }
  if (m_.size() != params.size()) throw ContractError("optimizer used with a different parameter set");
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.value(i).storage();
    const auto& g = grads[i].storage();
    auto& m = m_[i].storage();
    auto& v = v_[i].storage();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      const double mk = config_.beta1 * m[k] + (1.0 - config_.beta1) * gk;
      const double vk = config_.beta2 * v[k] + (1.0 - config_.beta2) * gk * gk;
      m[k] = static_cast<Real>(mk);
      v[k] = static_cast<Real>(vk);
      const double update = config_.lr * (mk / c1) / (std::sqrt(vk / c2) + config_.eps);
      p[k] = static_cast<Real>(static_cast<double>(p[k]) - update);
    }
  }
}

}  // namespace mfgan
