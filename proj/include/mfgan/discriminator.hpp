#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfgan/attention.hpp"
#include "mfgan/factors.hpp"
#include "mfgan/sequence.hpp"

namespace mfgan {

struct DiscriminatorConfig {
  /// One block is always built (`blocks` is ignored). `causal = false` is the
  /// bidirectional default; true gives the uni-directional variant.
  AttentionConfig attention{.d = 50, .heads = 1, .blocks = 1, .window = 50, .causal = false};
  int mlp_hidden = 0;  ///< 0 means d/2 (at least 1)

  int hidden() const;
  void validate() const;
};

/// One factor-specific discriminator. With several tables the per-factor
/// embeddings are concatenated and projected back to d (the "all factors in
/// one discriminator" variant).
struct DiscriminatorParams {
  DiscriminatorConfig config;
  std::vector<FactorTable> tables;  ///< not trainable
  ParameterSet values;
  std::vector<std::size_t> factor_embeddings;  ///< C^j, (rows x d), row 0 = padding
  std::size_t projection = 0;                  ///< (m·d x d), only when tables.size() > 1
  std::size_t positions = 0;                   ///< P, its own copy
  BlockParams block;
  std::size_t mlp_w1 = 0, mlp_b1 = 0, mlp_w2 = 0, mlp_b2 = 0;

  /// Table names joined with '+'.
  std::string name() const;
};

DiscriminatorParams init_discriminator(std::vector<FactorTable> tables, const DiscriminatorConfig& config,
                                       std::uint64_t seed);

/// E_D = C^j[bins of items] + P over the length-n window of `items`
/// (leading padding allowed); padding positions use row 0.
Var factor_sequence_embed(Tape& tape, const DiscriminatorParams& disc, std::span<const ItemId> items);

/// Pre-sigmoid MLP output read from block row `row` (default: the last
/// position, which always holds the last real item under left padding).
Var score_logit(Tape& tape, const DiscriminatorParams& disc, std::span<const ItemId> items, int row = -1);

/// ŷ = sigmoid(MLP(H_n)), kept strictly inside (0, 1).
double rationality_score(const DiscriminatorParams& disc, std::span<const ItemId> items);
/// ŷ read at window row `row` instead of the last row.
double score_at_row(const DiscriminatorParams& disc, std::span<const ItemId> items, int row);

/// −mean_real log D − mean_fake log(1 − D): the two expectation terms summed,
/// each a batch mean.
Var discriminator_loss(Tape& tape, const DiscriminatorParams& disc, std::span<const Sequence> real,
                       std::span<const Sequence> fake);
double discriminator_loss(const DiscriminatorParams& disc, std::span<const Sequence> real,
                          std::span<const Sequence> fake);

/// Clamps a probability into the open interval (0, 1).
double open_unit(double p);

}  // namespace mfgan
