#include "mfgan/reward.hpp"

#include <algorithm>
#include <cmath>

#include "mfgan/errors.hpp"

namespace mfgan {

CombinationParams CombinationParams::from_mode(LambdaMode mode, double soft_lambda) {
  switch (mode) {
    case LambdaMode::mean: return {0.0};
    case LambdaMode::min: return {-kLambdaLimit};
    case LambdaMode::max: return {kLambdaLimit};
    case LambdaMode::soft: return {soft_lambda};
  }
  return {0.0};
}

LambdaMode parse_lambda_mode(const std::string& text) {
  if (text == "mean") return LambdaMode::mean;
  if (text == "min") return LambdaMode::min;
  if (text == "max") return LambdaMode::max;
  if (text == "soft") return LambdaMode::soft;
  throw ConfigError("unknown lambda mode '" + text + "' (expected mean, min, max or soft)");
}

const char* to_string(LambdaMode mode) {
  switch (mode) {
    case LambdaMode::mean: return "mean";
    case LambdaMode::min: return "min";
    case LambdaMode::max: return "max";
    case LambdaMode::soft: return "soft";
  }
  return "?";
}

std::vector<double> combination_weights(std::span<const double> rewards, double lambda) {
  if (rewards.empty()) throw ContractError("combination_weights: no rewards");
  if (!std::isfinite(lambda)) throw ContractError("combination_weights: lambda must be finite");
  double top = -INFINITY;
  for (double y : rewards) {
    if (!std::isfinite(y)) throw ContractError("combination_weights: non-finite reward");
    top = std::max(top, lambda * y);
  }
  std::vector<double> w(rewards.size());
  double total = 0;
  for (std::size_t j = 0; j < rewards.size(); ++j) {
    w[j] = std::exp(lambda * rewards[j] - top);
    total += w[j];
  }
  for (auto& v : w) v /= total;
  return w;
}

double q_value(std::span<const double> rewards, double lambda) {
  const auto w = combination_weights(rewards, lambda);
  double q = 0;
  for (std::size_t j = 0; j < rewards.size(); ++j) q += w[j] * rewards[j];
  // Rounding may push the weighted sum a hair outside [min, max].
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  return std::clamp(q, *lo, *hi);
}

}  // namespace mfgan
