#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfgan/factors.hpp"
#include "mfgan/optimizer.hpp"
#include "mfgan/reward.hpp"
#include "mfgan/trainer.hpp"

namespace mfgan {

/// Discriminator layout.
/// full: one discriminator per factor; sdsf: a single item-id discriminator;
/// sdaf: one discriminator over all factors concatenated; uni-d: full with
/// causal discriminators.
enum class Variant { full, sdsf, sdaf, uni_d };

Variant parse_variant(const std::string& text);
const char* to_string(Variant v);

/// Parses "category:categorical, popularity:numeric:50, item:item-id".
std::vector<FactorSpec> parse_factor_specs(const std::string& text);
std::string format_factor_specs(const std::vector<FactorSpec>& specs);

/// Flat key=value run configuration. Unknown keys are rejected.
struct RunConfig {
  std::filesystem::path interactions;
  std::filesystem::path factors_file;  ///< optional
  std::vector<FactorSpec> factors{{"item", FactorKind::item_id, 0}};
  int k_core = 5;
  std::int64_t max_users = 0;
  std::filesystem::path out = "run";

  int window = 50;
  int d = 50;
  int heads = 1;
  int gen_blocks = 2;
  double dropout = 0.2;

  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double lr = 0.001;
  double adv_lr = 0.001;
  double disc_lr = 0.001;
  int batch_g = 128;
  int batch_d = 16;
  int pretrain_g_epochs = 20;
  int pretrain_d_epochs = 1;
  int rounds = 10;
  int g_epochs_per_round = 100;
  int d_epochs_per_round = 1;
  int g_batches_per_round = 0;
  int d_batches_per_round = 0;
  LambdaMode lambda_mode = LambdaMode::mean;
  double lambda = 1.0;  ///< used by lambda_mode=soft
  bool reward_baseline = false;
  int early_stop_rounds = 20;
  Variant variant = Variant::full;

  int eval_negatives = 100;
  int eval_k = 10;
  std::uint64_t seed = 0;

  /// Throws ConfigError on invalid combinations.
  void validate() const;
};

/// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(std::istream& in, const std::string& source,
                           const std::filesystem::path& base_dir = {});
RunConfig read_run_config(const std::filesystem::path& path);
/// Every key in a fixed order; parsing the result reproduces `config`.
std::string format_run_config(const RunConfig& config);

/// The trainer view of a run configuration for a catalog of `num_items`.
TrainingConfig training_config(const RunConfig& config, int num_items);

/// Discriminator groups for the configured variant.
std::vector<std::vector<FactorTable>> discriminator_tables(const RunConfig& config,
                                                           const std::vector<FactorTable>& tables);

}  // namespace mfgan
