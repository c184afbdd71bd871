#include "mfgan/generator.hpp"

#include <algorithm>
#include <cmath>

#include "mfgan/errors.hpp"

namespace mfgan {

void GeneratorConfig::validate() const {
  if (num_items < 1) throw ConfigError("generator: num_items must be >= 1");
  attention.validate();
  if (!attention.causal) throw ConfigError("generator: attention must be causal");
}

GeneratorParams init_generator(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  GeneratorParams gen;
  gen.config = config;
  const auto d = static_cast<std::size_t>(config.attention.d);
  const auto n = static_cast<std::size_t>(config.attention.window);
  const Real bound = Real{1} / std::sqrt(static_cast<Real>(config.attention.d));

  Tensor items = uniform_tensor({static_cast<std::size_t>(config.num_items) + 1, d}, bound, rng);
  for (auto& v : items.row(0)) v = 0;
  gen.item_embedding = gen.values.add("item_embedding", std::move(items));
  gen.positions = gen.values.add("positions", uniform_tensor({n, d}, bound, rng));
  for (int l = 0; l < config.attention.blocks; ++l) {
    gen.blocks.push_back(add_block_params(gen.values, "block" + std::to_string(l) + ".", config.attention, rng));
  }
  return gen;
}

std::size_t generator_param_count(const GeneratorConfig& config) {
  const auto d = static_cast<std::size_t>(config.attention.d);
  return (static_cast<std::size_t>(config.num_items) + 1) * d +
         static_cast<std::size_t>(config.attention.window) * d +
         static_cast<std::size_t>(config.attention.blocks) * block_param_count(config.attention);
}

namespace {

void check_window(const GeneratorParams& gen, std::span<const ItemId> window) {
  if (window.size() != static_cast<std::size_t>(gen.config.attention.window)) {
    throw ShapeError("generator: window length " + std::to_string(window.size()) + " != n=" +
                     std::to_string(gen.config.attention.window));
  }
  for (ItemId id : window) {
    if (id < 0 || id > gen.config.num_items) {
      throw IndexError("generator: item id " + std::to_string(id) + " outside [0, " +
                       std::to_string(gen.config.num_items) + "]");
    }
  }
}

}  // namespace

Var generator_hidden(Tape& tape, const GeneratorParams& gen, std::span<const ItemId> window) {
  check_window(gen, window);
  const auto pad = padding_mask(window);
  Var e = embedding_lookup(tape.param(gen.values, gen.item_embedding), window);
  Var f = positional_sum(e, tape.param(gen.values, gen.positions));
  for (const auto& block : gen.blocks) f = block_forward(f, gen.values, block, gen.config.attention, pad);
  return f;
}

Var forward_all_positions(Tape& tape, const GeneratorParams& gen, std::span<const ItemId> window) {
  Var hidden = generator_hidden(tape, gen, window);
  Var table = tape.param(gen.values, gen.item_embedding);
  Var real_items = slice_rows(table, 1, static_cast<std::size_t>(gen.config.num_items) + 1);
  return matmul_bt(hidden, real_items);
}

Tensor forward_all_positions(const GeneratorParams& gen, std::span<const ItemId> window) {
  Tape tape(Mode::eval, 0, false);
  return forward_all_positions(tape, gen, window).value();
}

std::vector<double> next_item_distribution(const GeneratorParams& gen, std::span<const ItemId> prefix) {
  const Sequence items = strip_padding(prefix);
  if (items.empty()) throw DataError("next_item_distribution: prefix has no real item");
  const Sequence window = window_pad(items, gen.config.attention.window);
  const Tensor logits = forward_all_positions(gen, window);
  const auto last = logits.row(logits.rows() - 1);
  const double mx = *std::max_element(last.begin(), last.end());
  std::vector<double> probs(last.size());
  double total = 0;
  for (std::size_t c = 0; c < last.size(); ++c) {
    probs[c] = std::exp(static_cast<double>(last[c]) - mx);
    total += probs[c];
  }
  for (auto& p : probs) p /= total;
  return probs;
}

std::size_t sample_index(std::span<const double> probabilities, Rng& rng) {
  if (probabilities.empty()) throw ContractError("sample_index: empty distribution");
  const double u = rng.uniform();
  double cumulative = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap above the final cumulative sum
  for (std::size_t i = probabilities.size(); i-- > 0;)
    if (probabilities[i] > 0) return i;
  return probabilities.size() - 1;
}

ItemId sample_next(const GeneratorParams& gen, std::span<const ItemId> prefix, Rng& rng) {
  const auto probs = next_item_distribution(gen, prefix);
  return static_cast<ItemId>(sample_index(probs, rng) + 1);
}

TeacherForcing teacher_forcing(std::span<const ItemId> sequence, int window) {
  const Sequence items = strip_padding(sequence);
  if (items.size() < 2) throw DataError("mle_loss: sequence needs at least 2 real items");
  std::span<const ItemId> all(items);
  return TeacherForcing{window_pad(all.first(all.size() - 1), window), window_pad(all.subspan(1), window)};
}

Var mle_loss(Tape& tape, const GeneratorParams& gen, std::span<const ItemId> sequence) {
  const auto tf = teacher_forcing(sequence, gen.config.attention.window);
  Var logp = log_softmax_rows(forward_all_positions(tape, gen, tf.inputs));
  std::vector<std::size_t> rows, cols;
  for (std::size_t t = 0; t < tf.targets.size(); ++t) {
    if (tf.targets[t] == kPadItem) continue;
    rows.push_back(t);
    cols.push_back(static_cast<std::size_t>(tf.targets[t] - 1));
  }
  return scale(mean(pick(logp, rows, cols)), Real{-1});
}

double mle_loss(const GeneratorParams& gen, std::span<const ItemId> sequence) {
  Tape tape(Mode::eval, 0, false);
  return static_cast<double>(mle_loss(tape, gen, sequence).value()[0]);
}

}  // namespace mfgan
