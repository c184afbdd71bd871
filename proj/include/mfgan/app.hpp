#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfgan/config.hpp"
#include "mfgan/data_pipeline.hpp"
#include "mfgan/evaluation.hpp"

namespace mfgan {

/// Output directory layout.
struct RunPaths {
  std::filesystem::path root;
  std::filesystem::path manifest() const { return root / "manifest"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path pretrain_checkpoint() const { return checkpoints() / "pretrain.ckpt"; }
  std::filesystem::path last_checkpoint() const { return checkpoints() / "last.ckpt"; }
  std::filesystem::path final_checkpoint() const { return checkpoints() / "final.ckpt"; }
  std::filesystem::path train_log() const { return root / "train.log"; }
  std::filesystem::path eval() const { return root / "eval"; }
  std::filesystem::path attribution() const { return root / "attribution"; }
  std::filesystem::path effective_config() const { return root / "config.effective"; }
};

/// Ingest, filter, split and bin; writes the manifest and prints the
/// statistics table to `out`.
Manifest run_prep(const RunConfig& config, std::ostream& out);

struct TrainOptions {
  bool resume = false;          ///< continue from checkpoints/last.ckpt when present
  std::int64_t stop_after = 0;  ///< > 0: stop after this many units of work
};

/// Pretraining and adversarial training from the manifest. Writes
/// checkpoints after every unit of work and appends to train.log.
void run_train(const RunConfig& config, const TrainOptions& options, std::ostream& out);

/// Generator (from `checkpoint`) and PopRec on the test split. Reports go to
/// eval/<checkpoint stem>/.
std::vector<MetricsReport> run_evaluate(const RunConfig& config, const std::filesystem::path& checkpoint,
                                        std::ostream& out);

/// Per-position discriminator scores for selected sequences.
struct AttributionRow {
  std::string user;
  int position = 0;  ///< 1-based
  std::string item;
  std::vector<double> scores;  ///< one per discriminator
  std::size_t dominant = 0;    ///< argmax, first index on ties
};

struct AttributionTable {
  std::vector<std::string> factors;  ///< discriminator names
  std::vector<AttributionRow> rows;
};

/// First index of the largest score.
std::size_t dominant_factor(const std::vector<double>& scores);

/// Scores every prefix i_1..i_t of each selected user's full sequence with
/// every discriminator. An empty selection takes the first five users.
AttributionTable run_attribute(const RunConfig& config, const std::filesystem::path& checkpoint,
                               const std::vector<std::string>& users, std::ostream& out);

void write_attribution_tsv(std::ostream& out, const AttributionTable& table);
void write_attribution_json(std::ostream& out, const AttributionTable& table);

}  // namespace mfgan
