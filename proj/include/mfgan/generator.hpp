#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfgan/attention.hpp"
#include "mfgan/sequence.hpp"

namespace mfgan {

struct GeneratorConfig {
  int num_items = 0;          ///< |I|, real items only
  AttentionConfig attention;  ///< causal is forced on
  void validate() const;
};

/// Item embeddings M_G ((|I|+1) x d, row 0 = padding), positional encoding
/// P (n x d), and L causal attention blocks. The prediction layer reuses M_G.
struct GeneratorParams {
  GeneratorConfig config;
  ParameterSet values;
  std::size_t item_embedding = 0;
  std::size_t positions = 0;
  std::vector<BlockParams> blocks;
};

GeneratorParams init_generator(const GeneratorConfig& config, std::uint64_t seed);

/// (|I|+1)·d + n·d + L·(block size). There is no separate output matrix.
std::size_t generator_param_count(const GeneratorConfig& config);

/// Final hidden states F^L for a length-n window.
Var generator_hidden(Tape& tape, const GeneratorParams& gen, std::span<const ItemId> window);

/// Logits n x |I|; row t scores the item that follows position t. Column c is item c+1.
Var forward_all_positions(Tape& tape, const GeneratorParams& gen, std::span<const ItemId> window);
/// Eval-mode convenience.
Tensor forward_all_positions(const GeneratorParams& gen, std::span<const ItemId> window);

/// G(· | prefix) over real items: entry c is the probability of item c+1.
/// `prefix` may carry left padding; it must hold at least one real item.
std::vector<double> next_item_distribution(const GeneratorParams& gen, std::span<const ItemId> prefix);

/// Inverse-CDF draw from a probability vector; returns the index.
std::size_t sample_index(std::span<const double> probabilities, Rng& rng);

/// Draws î ~ G(· | prefix).
ItemId sample_next(const GeneratorParams& gen, std::span<const ItemId> prefix, Rng& rng);

/// Mean over real targets of −log G(i_{t+1} | i_{1:t}). Leading padding in
/// `sequence` is ignored; the last n+1 real items are used.
Var mle_loss(Tape& tape, const GeneratorParams& gen, std::span<const ItemId> sequence);
double mle_loss(const GeneratorParams& gen, std::span<const ItemId> sequence);

/// Input window and target window for teacher forcing over `sequence`.
struct TeacherForcing {
  Sequence inputs;   ///< window_pad(i_1..i_{m-1})
  Sequence targets;  ///< window_pad(i_2..i_m); 0 marks excluded rows
};
TeacherForcing teacher_forcing(std::span<const ItemId> sequence, int window);

}  // namespace mfgan
