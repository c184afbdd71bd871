#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mfgan/data_pipeline.hpp"
#include "mfgan/generator.hpp"
#include "mfgan/rng.hpp"

namespace mfgan {

struct EvalProtocol {
  int negatives = 100;  ///< sampled negatives per positive
  int cutoff = 10;      ///< k of NDCG@k / HR@k
  std::uint64_t seed = 0;
};

/// Which held-out item is ranked.
enum class EvalTarget { validation, test };

struct RankMetrics {
  double ndcg = 0;
  double hr = 0;
  double rr = 0;
};

struct UserMetrics {
  std::size_t user = 0;
  ItemId target = kPadItem;
  int rank = 0;
  RankMetrics metrics;
};

struct MetricsReport {
  std::string model;
  double ndcg = 0;  ///< mean NDCG@k
  double hr = 0;    ///< mean HR@k
  double mrr = 0;   ///< mean reciprocal rank, no cutoff
  std::size_t users = 0;
  int cutoff = 10;
  std::vector<UserMetrics> per_user;
};

/// `count` distinct items from 1..num_items outside `interacted` (sorted),
/// uniformly without replacement. Returns every candidate, and appends a
/// warning, when fewer than `count` exist.
std::vector<ItemId> sample_negatives(int num_items, std::span<const ItemId> interacted, int count, Rng& rng,
                                     std::vector<std::string>* warnings = nullptr);

/// 1 + #(neg > pos) + #(neg == pos): ties count against the positive.
/// NaN scores are rejected; ±inf are allowed.
int rank_of_positive(double positive, std::span<const double> negatives);

/// hr = [rank <= k]; ndcg = 1/log2(rank+1) if rank <= k else 0; rr = 1/rank.
RankMetrics compute_metrics(int rank, int k = 10);

/// Scores each candidate item given a user's prefix.
using Scorer = std::function<std::vector<double>(std::span<const ItemId> prefix, std::span<const ItemId> candidates)>;

/// Ranks the held-out item against `protocol.negatives` sampled negatives per
/// user (seeded per user) and averages the metrics in user order.
MetricsReport evaluate_model(const Scorer& scorer, const DatasetSplit& split, const EvalProtocol& protocol,
                             EvalTarget target = EvalTarget::test, std::string model = "model");

/// Generator logits at the last real prefix position.
Scorer generator_scorer(const GeneratorParams& gen);

/// Score = train-split interaction count, regardless of user or prefix.
Scorer poprec_baseline(const DatasetSplit& split);

/// One line per report: model=... users=... ndcg@k=... hr@k=... mrr=...
void write_report_kv(std::ostream& out, std::span<const MetricsReport> reports);
std::vector<MetricsReport> parse_report_kv(std::istream& in);
/// Side-by-side human-readable table.
void write_report_table(std::ostream& out, std::span<const MetricsReport> reports);
void write_per_user(std::ostream& out, const MetricsReport& report);

}  // namespace mfgan
