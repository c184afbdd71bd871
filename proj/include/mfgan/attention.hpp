#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mfgan/autodiff.hpp"

namespace mfgan {

/// Shape and behaviour of a stack of self-attention blocks.
struct AttentionConfig {
  int d = 50;           ///< embedding width
  int heads = 1;        ///< h; d must be divisible by h
  int blocks = 2;       ///< L
  int window = 50;      ///< n, maximum sequence length
  bool causal = true;   ///< mask keys after the query position
  Real dropout = Real(0.2);
  bool residual = true;    ///< residual connection around each sub-layer
  bool layer_norm = true;  ///< layer normalization after each residual sum
  int ffn_width = 0;       ///< 0 means d

  int head_width() const { return d / heads; }
  int ffn() const { return ffn_width > 0 ? ffn_width : d; }
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Indices into a ParameterSet for one attention block.
struct BlockParams {
  std::vector<std::size_t> wq, wk, wv;  // one d x (d/h) matrix per head
  std::size_t wo = 0;                   // d x d
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
  bool has_norm = false;
  std::size_t ln1_gain = 0, ln1_bias = 0, ln2_gain = 0, ln2_bias = 0;
};

/// Registers a block's parameters under `prefix` (e.g. "block0.") with
/// uniform [-1/sqrt(d), 1/sqrt(d)] weights, zero biases and unit norm gains.
BlockParams add_block_params(ParameterSet& params, const std::string& prefix, const AttentionConfig& config,
                             Rng& rng);

/// Number of scalars add_block_params creates.
std::size_t block_param_count(const AttentionConfig& config);

/// E + P.
Var positional_sum(Var embeddings, Var positions);

/// Attention mask for n positions: key j is hidden from query i when
/// (causal and j > i) or (key j is padding and j != i). A padding query keeps
/// its own key so that no row is fully masked.
std::vector<char> attention_mask(std::size_t n, bool causal, std::span<const char> key_padding = {});

/// softmax(Q K^T / sqrt(width) with mask) V.
Var scaled_dot_attention(Var q, Var k, Var v, bool causal, std::span<const char> key_padding = {});

/// [head_1; ...; head_h] W^O with head_i = Attention(F W^Q_i, F W^K_i, F W^V_i).
Var multi_head_attention(Var f, const ParameterSet& params, const BlockParams& block, bool causal,
                         std::span<const char> key_padding = {});

/// max(0, x W1 + b1) W2 + b2 applied to every row independently.
Var pffn(Var f, const ParameterSet& params, const BlockParams& block);

/// F' = Norm(F + Dropout(MHA(F))); out = Norm(F' + Dropout(PFFN(F'))).
/// Residual and norm are switchable through `config`; dropout follows the tape's mode.
Var block_forward(Var f, const ParameterSet& params, const BlockParams& block, const AttentionConfig& config,
                  std::span<const char> key_padding = {});

}  // namespace mfgan
