#include "mfgan/discriminator.hpp"

#include <cmath>
#include <limits>

#include "mfgan/errors.hpp"

namespace mfgan {

int DiscriminatorConfig::hidden() const { return mlp_hidden > 0 ? mlp_hidden : std::max(1, attention.d / 2); }

void DiscriminatorConfig::validate() const {
  attention.validate();
  if (mlp_hidden < 0) throw ConfigError("discriminator: mlp_hidden must be >= 0");
}

std::string DiscriminatorParams::name() const {
  std::string out;
  for (const auto& t : tables) out += (out.empty() ? "" : "+") + t.name;
  return out;
}

DiscriminatorParams init_discriminator(std::vector<FactorTable> tables, const DiscriminatorConfig& config,
                                       std::uint64_t seed) {
  config.validate();
  if (tables.empty()) throw ConfigError("discriminator needs at least one factor table");
  Rng rng(seed);
  DiscriminatorParams disc;
  disc.config = config;
  disc.config.attention.blocks = 1;
  disc.tables = std::move(tables);
  const auto d = static_cast<std::size_t>(config.attention.d);
  const auto n = static_cast<std::size_t>(config.attention.window);
  const auto hidden = static_cast<std::size_t>(config.hidden());
  const Real bound = Real{1} / std::sqrt(static_cast<Real>(config.attention.d));

  for (const auto& table : disc.tables) {
    Tensor c = uniform_tensor({static_cast<std::size_t>(table.table_rows), d}, bound, rng);
    for (auto& v : c.row(0)) v = 0;
    disc.factor_embeddings.push_back(disc.values.add("factor." + table.name, std::move(c)));
  }
  if (disc.tables.size() > 1) {
    const auto wide = d * disc.tables.size();
    disc.projection = disc.values.add("factor_projection",
                                      uniform_tensor({wide, d}, Real{1} / std::sqrt(static_cast<Real>(wide)), rng));
  }
  disc.positions = disc.values.add("positions", uniform_tensor({n, d}, bound, rng));
  disc.block = add_block_params(disc.values, "block0.", disc.config.attention, rng);
  disc.mlp_w1 = disc.values.add("mlp.w1", uniform_tensor({d, hidden}, bound, rng));
  disc.mlp_b1 = disc.values.add("mlp.b1", Tensor({hidden}));
  disc.mlp_w2 = disc.values.add("mlp.w2", uniform_tensor({hidden, 1}, bound, rng));
  disc.mlp_b2 = disc.values.add("mlp.b2", Tensor({1}));
  return disc;
}

Var factor_sequence_embed(Tape& tape, const DiscriminatorParams& disc, std::span<const ItemId> items) {
  const Sequence window = window_pad(strip_padding(items), disc.config.attention.window);
  std::vector<Var> parts;
  for (std::size_t j = 0; j < disc.tables.size(); ++j) {
    std::vector<std::int32_t> rows(window.size());
    for (std::size_t t = 0; t < window.size(); ++t) rows[t] = window[t] == kPadItem ? 0 : disc.tables[j].row(window[t]);
    parts.push_back(embedding_lookup(tape.param(disc.values, disc.factor_embeddings[j]), rows));
  }
  Var c = parts.size() == 1 ? parts[0] : matmul(concat_cols(parts), tape.param(disc.values, disc.projection));
  return positional_sum(c, tape.param(disc.values, disc.positions));
}

Var score_logit(Tape& tape, const DiscriminatorParams& disc, std::span<const ItemId> items, int row) {
  const Sequence window = window_pad(strip_padding(items), disc.config.attention.window);
  if (window.back() == kPadItem) throw DataError("discriminator: sequence has no real item");
  const int n = disc.config.attention.window;
  if (row < 0) row = n - 1;
  if (row >= n) throw IndexError("score_logit: row outside window");
  Var e = factor_sequence_embed(tape, disc, window);
  Var h = block_forward(e, disc.values, disc.block, disc.config.attention, padding_mask(window));
  Var last = slice_rows(h, static_cast<std::size_t>(row), static_cast<std::size_t>(row) + 1);
  Var hidden = relu(add_bias(matmul(last, tape.param(disc.values, disc.mlp_w1)), tape.param(disc.values, disc.mlp_b1)));
  return add_bias(matmul(hidden, tape.param(disc.values, disc.mlp_w2)), tape.param(disc.values, disc.mlp_b2));
}

double open_unit(double p) {
  if (!(p > 0.0)) return std::numeric_limits<double>::denorm_min();
  if (!(p < 1.0)) return std::nextafter(1.0, 0.0);
  return p;
}

namespace {
double logit_to_probability(double z) {
  const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return open_unit(p);
}
}  // namespace

double score_at_row(const DiscriminatorParams& disc, std::span<const ItemId> items, int row) {
  Tape tape(Mode::eval, 0, false);
  return logit_to_probability(static_cast<double>(score_logit(tape, disc, items, row).value()[0]));
}

double rationality_score(const DiscriminatorParams& disc, std::span<const ItemId> items) {
  return score_at_row(disc, items, -1);
}

Var discriminator_loss(Tape& tape, const DiscriminatorParams& disc, std::span<const Sequence> real,
                       std::span<const Sequence> fake) {
  if (real.empty() || fake.empty()) throw ContractError("discriminator_loss: empty batch");
  std::vector<Var> real_logits, fake_logits;
  for (const auto& s : real) real_logits.push_back(score_logit(tape, disc, s));
  for (const auto& s : fake) fake_logits.push_back(scale(score_logit(tape, disc, s), Real{-1}));
  // log(1 − σ(z)) = log σ(−z)
  Var real_term = mean(log_sigmoid(real_logits.size() == 1 ? real_logits[0] : concat_cols(real_logits)));
  Var fake_term = mean(log_sigmoid(fake_logits.size() == 1 ? fake_logits[0] : concat_cols(fake_logits)));
  return scale(add(real_term, fake_term), Real{-1});
}

double discriminator_loss(const DiscriminatorParams& disc, std::span<const Sequence> real,
                          std::span<const Sequence> fake) {
  Tape tape(Mode::eval, 0, false);
  return static_cast<double>(discriminator_loss(tape, disc, real, fake).value()[0]);
}

}  // namespace mfgan
