#pragma once

#include <span>
#include <string>
#include <vector>

namespace mfgan {

/// Large enough that exp(λ·Δŷ) separates rewards in (0,1) to ~1e-6.
inline constexpr double kLambdaLimit = 40.0;

/// λ presets for combining discriminator rewards.
enum class LambdaMode { mean, min, max, soft };

struct CombinationParams {
  double lambda = 0.0;

  static CombinationParams from_mode(LambdaMode mode, double soft_lambda = 1.0);
};

LambdaMode parse_lambda_mode(const std::string& text);
const char* to_string(LambdaMode mode);

/// ω_j = exp(λ ŷ_j) / Σ_j' exp(λ ŷ_j'), with the max exponent subtracted first.
std::vector<double> combination_weights(std::span<const double> rewards, double lambda);

/// Q = Σ_j ω_j ŷ_j.
double q_value(std::span<const double> rewards, double lambda);

}  // namespace mfgan
