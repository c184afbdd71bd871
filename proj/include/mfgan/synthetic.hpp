#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mfgan/data_pipeline.hpp"

namespace mfgan {

/// Interaction data whose transitions are driven by a hidden item category:
/// the next category follows a sparse Markov chain, and within a category
/// items are drawn by a Zipf-like popularity.
struct SyntheticConfig {
  int items = 100;
  int users = 500;
  int categories = 10;
  int min_length = 10;
  int max_length = 30;
  double follow = 0.7;  ///< probability of moving to the successor category
  std::uint64_t seed = 0;
};

struct SyntheticData {
  std::vector<InteractionRecord> interactions;
  std::vector<std::pair<std::string, std::string>> item_category;  ///< raw item -> category
};

SyntheticData make_synthetic(const SyntheticConfig& config);

/// Writes interactions.tsv and factors.tsv into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace mfgan
