#include "mfgan/attention.hpp"

#include <cmath>

#include "mfgan/errors.hpp"

namespace mfgan {

void AttentionConfig::validate() const {
  if (d < 1 || heads < 1 || blocks < 0 || window < 1) {
    throw ConfigError("attention config: d, heads, window must be >= 1 and blocks >= 0");
  }
  if (d % heads != 0) {
    throw ConfigError("attention config: d=" + std::to_string(d) + " is not divisible by heads=" +
                      std::to_string(heads));
  }
  if (!(dropout >= Real{0} && dropout < Real{1})) throw ConfigError("attention config: dropout must lie in [0, 1)");
  if (ffn_width < 0) throw ConfigError("attention config: ffn_width must be >= 0");
}

BlockParams add_block_params(ParameterSet& params, const std::string& prefix, const AttentionConfig& config,
                             Rng& rng) {
  config.validate();
  const auto d = static_cast<std::size_t>(config.d);
  const auto hw = static_cast<std::size_t>(config.head_width());
  const auto ff = static_cast<std::size_t>(config.ffn());
  const Real bound = Real{1} / std::sqrt(static_cast<Real>(config.d));

  BlockParams b;
  for (int h = 0; h < config.heads; ++h) {
    const std::string head = prefix + "head" + std::to_string(h) + ".";
    b.wq.push_back(params.add(head + "wq", uniform_tensor({d, hw}, bound, rng)));
    b.wk.push_back(params.add(head + "wk", uniform_tensor({d, hw}, bound, rng)));
    b.wv.push_back(params.add(head + "wv", uniform_tensor({d, hw}, bound, rng)));
  }
  b.wo = params.add(prefix + "wo", uniform_tensor({d, d}, bound, rng));
  b.w1 = params.add(prefix + "ffn.w1", uniform_tensor({d, ff}, bound, rng));
  b.b1 = params.add(prefix + "ffn.b1", Tensor({ff}));
  b.w2 = params.add(prefix + "ffn.w2", uniform_tensor({ff, d}, bound, rng));
  b.b2 = params.add(prefix + "ffn.b2", Tensor({d}));
  b.has_norm = config.layer_norm;
  if (b.has_norm) {
    b.ln1_gain = params.add(prefix + "norm1.gain", Tensor::filled({d}, Real{1}));
    b.ln1_bias = params.add(prefix + "norm1.bias", Tensor({d}));
    b.ln2_gain = params.add(prefix + "norm2.gain", Tensor::filled({d}, Real{1}));
    b.ln2_bias = params.add(prefix + "norm2.bias", Tensor({d}));
  }
  return b;
}

std::size_t block_param_count(const AttentionConfig& config) {
  const auto d = static_cast<std::size_t>(config.d);
  const auto ff = static_cast<std::size_t>(config.ffn());
  std::size_t n = 3 * d * d;    // all heads of W^Q, W^K, W^V
  n += d * d;                   // W^O
  n += d * ff + ff + ff * d + d;
  if (config.layer_norm) n += 4 * d;
  return n;
}

Var positional_sum(Var embeddings, Var positions) { return add(embeddings, positions); }

std::vector<char> attention_mask(std::size_t n, bool causal, std::span<const char> key_padding) {
  if (!key_padding.empty() && key_padding.size() != n) throw ShapeError("attention_mask: padding length");
  std::vector<char> mask(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const bool future = causal && j > i;
      const bool pad = !key_padding.empty() && key_padding[j] && j != i;
      mask[i * n + j] = static_cast<char>(future || pad);
    }
  return mask;
}

Var scaled_dot_attention(Var q, Var k, Var v, bool causal, std::span<const char> key_padding) {
  const std::size_t n = q.value().rows();
  if (k.value().rows() != n || v.value().rows() != n || k.value().cols() != q.value().cols()) {
    throw ShapeError("scaled_dot_attention: inconsistent Q/K/V shapes");
  }
  const Real temperature = std::sqrt(static_cast<Real>(q.value().cols()));
  Var logits = scale(matmul_bt(q, k), Real{1} / temperature);
  const bool any_mask = causal || !key_padding.empty();
  if (any_mask) logits = masked_fill(logits, attention_mask(n, causal, key_padding));
  return matmul(softmax_rows(logits), v);
}

Var multi_head_attention(Var f, const ParameterSet& params, const BlockParams& block, bool causal,
                         std::span<const char> key_padding) {
  Tape& tape = *f.tape;
  std::vector<Var> heads;
  heads.reserve(block.wq.size());
  for (std::size_t h = 0; h < block.wq.size(); ++h) {
    Var q = matmul(f, tape.param(params, block.wq[h]));
    Var k = matmul(f, tape.param(params, block.wk[h]));
    Var v = matmul(f, tape.param(params, block.wv[h]));
    heads.push_back(scaled_dot_attention(q, k, v, causal, key_padding));
  }
  Var joined = heads.size() == 1 ? heads[0] : concat_cols(heads);
  return matmul(joined, tape.param(params, block.wo));
}

Var pffn(Var f, const ParameterSet& params, const BlockParams& block) {
  Tape& tape = *f.tape;
  Var hidden = relu(add_bias(matmul(f, tape.param(params, block.w1)), tape.param(params, block.b1)));
  return add_bias(matmul(hidden, tape.param(params, block.w2)), tape.param(params, block.b2));
}

Var block_forward(Var f, const ParameterSet& params, const BlockParams& block, const AttentionConfig& config,
                  std::span<const char> key_padding) {
  Tape& tape = *f.tape;
  const bool norm = config.layer_norm && block.has_norm;

  Var x = dropout(multi_head_attention(f, params, block, config.causal, key_padding), config.dropout);
  if (config.residual) x = add(f, x);
  if (norm) x = layer_norm(x, tape.param(params, block.ln1_gain), tape.param(params, block.ln1_bias));

  Var y = dropout(pffn(x, params, block), config.dropout);
  if (config.residual) y = add(x, y);
  if (norm) y = layer_norm(y, tape.param(params, block.ln2_gain), tape.param(params, block.ln2_bias));
  return y;
}

}  // namespace mfgan
