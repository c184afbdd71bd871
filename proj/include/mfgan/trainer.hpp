#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mfgan/checkpoint.hpp"
#include "mfgan/data_pipeline.hpp"
#include "mfgan/discriminator.hpp"
#include "mfgan/evaluation.hpp"
#include "mfgan/generator.hpp"
#include "mfgan/optimizer.hpp"

namespace mfgan {

struct TrainingConfig {
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  OptimizerConfig mle_optimizer;                           ///< generator pretraining
  OptimizerConfig adv_optimizer{.lr = 0.0002};             ///< generator policy-gradient steps
  OptimizerConfig disc_optimizer;
  int batch_g = 128;
  int batch_d = 16;
  int pretrain_g_epochs = 20;
  int pretrain_d_epochs = 1;
  int rounds = 10;                ///< adversarial rounds (each: G epochs then D epochs)
  int g_epochs_per_round = 100;   ///< full passes over the training sequences
  int d_epochs_per_round = 1;
  int g_batches_per_round = 0;    ///< > 0 replaces the G epochs by this many batches
  int d_batches_per_round = 0;    ///< > 0 replaces the D epochs by this many batches
  double lambda = 0.0;
  bool reward_baseline = false;   ///< subtract the batch mean reward
  int early_stop_rounds = 20;     ///< 0 disables early stopping
  EvalProtocol validation;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One line per record, `key=value` fields separated by spaces.
class TrainingLog {
 public:
  explicit TrainingLog(std::ostream* out = nullptr) : out_(out) {}
  void record(const std::vector<std::pair<std::string, std::string>>& fields);
  static std::string num(double v);
  static std::string num(std::int64_t v);

 private:
  std::ostream* out_;
};

/// Training sequences usable for teacher forcing (at least 2 items).
std::vector<Sequence> training_sequences(const DatasetSplit& split);

/// One pass over `data` in shuffled mini-batches of mean MLE loss; returns the
/// mean loss over sequences.
double mle_epoch(GeneratorParams& gen, Optimizer& opt, std::span<const Sequence> data, int batch, Rng& rng);

/// Initializes a generator and runs `config.pretrain_g_epochs` MLE epochs.
GeneratorParams pretrain_generator(std::span<const Sequence> data, const TrainingConfig& config,
                                   TrainingLog* log = nullptr);

struct NegativeBatch {
  std::vector<Sequence> real;  ///< i_1..i_t
  std::vector<Sequence> fake;  ///< i_1..i_{t-1}, î_t
};

/// For each sequence, a position t ≥ 2 is drawn uniformly; the fake keeps the
/// real prefix and replaces i_t by a draw from G(· | i_{1:t-1}).
NegativeBatch generate_negatives(const GeneratorParams& gen, std::span<const Sequence> real, Rng& rng);

/// One optimizer step on the discriminator loss; returns the loss before the step.
double d_step(DiscriminatorParams& disc, Optimizer& opt, std::span<const Sequence> real,
              std::span<const Sequence> fake);

/// Real/fake classification accuracy at threshold 0.5.
double discriminator_accuracy(const DiscriminatorParams& disc, std::span<const Sequence> real,
                              std::span<const Sequence> fake);

/// Q(prefix, item): discriminator scores of prefix+item combined with λ.
double combined_reward(std::span<const DiscriminatorParams> discs, std::span<const ItemId> prefix, ItemId item,
                       double lambda);

struct GStepResult {
  double objective = 0;    ///< mean over positions of Q · log G(î | prefix)
  double mean_reward = 0;  ///< mean Q
  std::size_t positions = 0;
};

/// Policy-gradient step over every real teacher-forced position of every
/// sequence in `batch`: sample î, score it, ascend on Q · log G(î | prefix).
/// Rewards are constants; discriminators are only read.
GStepResult g_step(GeneratorParams& gen, Optimizer& opt, std::span<const DiscriminatorParams> discs,
                   std::span<const Sequence> batch, double lambda, Rng& rng, Mode mode = Mode::train,
                   bool baseline = false);

struct PolicyGradient {
  GradientSet grad;   ///< ascent direction with respect to gen.values
  double value = 0;   ///< sampled: Q of the drawn action; exact: J
  ItemId action = kPadItem;
};

/// Single-sample estimator Q(prefix, î) ∇ log G(î | prefix), î ~ G(· | prefix).
PolicyGradient policy_gradient_estimate(const GeneratorParams& gen, std::span<const DiscriminatorParams> discs,
                                        std::span<const ItemId> prefix, double lambda, Rng& rng);

/// J = Σ_i G(i | prefix) Q(prefix, i) and its exact gradient, by enumerating
/// the catalog (at most 64 items).
PolicyGradient exact_policy_gradient(const GeneratorParams& gen, std::span<const DiscriminatorParams> discs,
                                     std::span<const ItemId> prefix, double lambda);

/// Everything adversarial training needs to continue from a checkpoint.
struct TrainerState {
  GeneratorParams generator;
  std::vector<DiscriminatorParams> discriminators;
  Optimizer mle_opt;
  Optimizer adv_opt;
  std::vector<Optimizer> disc_opts;
  Rng rng;
  std::int64_t mle_epochs = 0;      ///< completed MLE pretraining epochs
  std::int64_t d_pretrain_epochs = 0;
  std::int64_t rounds = 0;          ///< completed adversarial rounds
  std::int64_t stale_rounds = 0;    ///< rounds since the best validation NDCG
  std::int64_t best_round = -1;
  double best_ndcg = -1;
  ParameterSet best_generator;      ///< generator values at best_round
  bool finished = false;
  std::int64_t log_bytes = 0;       ///< training log length at this state
};

/// Fresh state. `tables` gives one discriminator per entry (each entry may
/// hold several factor tables).
TrainerState init_trainer(const TrainingConfig& config, const std::vector<std::vector<FactorTable>>& tables);

/// Units of work: one MLE epoch, one discriminator pretraining epoch, or one
/// adversarial round.
struct TrainerHooks {
  /// Called after each completed unit, with the stage name.
  std::function<void(const TrainerState&, const std::string& stage)> after_unit;
  /// Returning true stops training after the current unit.
  std::function<bool(const TrainerState&)> should_stop;
};

/// Runs (or continues) MLE pretraining, discriminator pretraining and the
/// adversarial loop until the round budget or the early-stop rule. When done,
/// the generator holds the best-validation adversarial round.
void adversarial_train(TrainerState& state, const TrainingConfig& config, const DatasetSplit& split,
                       TrainingLog& log, const TrainerHooks& hooks = {});

/// Digest of everything that determines parameter shapes.
std::uint64_t model_digest(const TrainingConfig& config, const std::vector<std::vector<FactorTable>>& tables);

CheckpointData trainer_checkpoint(const TrainerState& state, std::uint64_t digest);
/// Overwrites `state` (built by init_trainer for the same configuration)
/// from a checkpoint; every tensor shape must match.
void restore_trainer(TrainerState& state, const CheckpointData& data);
/// Loads only the generator values.
void restore_generator(GeneratorParams& gen, const CheckpointData& data);
/// Loads only the discriminator values.
void restore_discriminators(std::vector<DiscriminatorParams>& discs, const CheckpointData& data);

/// Validation NDCG-based report of a generator.
MetricsReport validate_generator(const GeneratorParams& gen, const DatasetSplit& split, const EvalProtocol& protocol);

}  // namespace mfgan
