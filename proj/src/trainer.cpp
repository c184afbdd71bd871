#include "mfgan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

#include "mfgan/errors.hpp"
#include "mfgan/reward.hpp"

namespace mfgan {

void TrainingConfig::validate() const {
  generator.validate();
  discriminator.validate();
  if (batch_g < 1 || batch_d < 1) throw ConfigError("batch sizes must be >= 1");
  if (pretrain_g_epochs < 0 || pretrain_d_epochs < 0 || rounds < 0) throw ConfigError("epoch budgets must be >= 0");
  if (g_epochs_per_round < 1 || d_epochs_per_round < 1) throw ConfigError("G:D alternation counts must be >= 1");
  if (g_batches_per_round < 0 || d_batches_per_round < 0) throw ConfigError("batch overrides must be >= 0");
  if (early_stop_rounds < 0) throw ConfigError("early_stop_rounds must be >= 0");
  if (!std::isfinite(lambda)) throw ConfigError("lambda must be finite");
  for (const auto* o : {&mle_optimizer, &adv_optimizer, &disc_optimizer}) {
    if (!(o->lr > 0) || !std::isfinite(o->lr)) throw ConfigError("learning rates must be positive");
  }
  if (validation.negatives < 1 || validation.cutoff < 1) throw ConfigError("evaluation negatives and cutoff must be >= 1");
}

void TrainingLog::record(const std::vector<std::pair<std::string, std::string>>& fields) {
  if (!out_) return;
  bool first = true;
  for (const auto& [k, v] : fields) {
    if (!first) *out_ << ' ';
    *out_ << k << '=' << v;
    first = false;
  }
  *out_ << '\n';
  out_->flush();
}

std::string TrainingLog::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string TrainingLog::num(std::int64_t v) { return std::to_string(v); }

std::vector<Sequence> training_sequences(const DatasetSplit& split) {
  std::vector<Sequence> out;
  for (const auto& row : split.rows)
    if (row.train.size() >= 2) out.push_back(row.train);
  return out;
}

namespace {

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

/// `count` distinct indices below n (all of them, shuffled, if count >= n).
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::size_t take = std::min(n, count);
  for (std::size_t i = 0; i < take; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  order.resize(take);
  return order;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch, Rng& rng) {
  const auto order = shuffled(n, rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(batch)) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + static_cast<std::size_t>(batch))));
  }
  return out;
}

std::vector<Sequence> gather(std::span<const Sequence> data, const std::vector<std::size_t>& idx) {
  std::vector<Sequence> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data[i]);
  return out;
}

double mle_batch(GeneratorParams& gen, Optimizer& opt, std::span<const Sequence> batch, Rng& rng) {
  GradientSet acc(gen.values);
  double total = 0;
  for (const auto& seq : batch) {
    Tape tape(Mode::train, rng.next());
    Var loss = mle_loss(tape, gen, seq);
    total += static_cast<double>(loss.value()[0]);
    acc.add(tape.backward(loss, gen.values));
  }
  acc.scale(Real(1) / static_cast<Real>(batch.size()));
  opt.step(gen.values, acc);
  return total;
}

}  // namespace

double mle_epoch(GeneratorParams& gen, Optimizer& opt, std::span<const Sequence> data, int batch, Rng& rng) {
  if (data.empty()) throw DataError("MLE pretraining: no training sequence with at least 2 items");
  double total = 0;
  for (const auto& idx : epoch_batches(data.size(), batch, rng)) total += mle_batch(gen, opt, gather(data, idx), rng);
  return total / static_cast<double>(data.size());
}

GeneratorParams pretrain_generator(std::span<const Sequence> data, const TrainingConfig& config, TrainingLog* log) {
  config.validate();
  if (data.empty()) throw DataError("MLE pretraining: empty training data");
  Rng rng(derive_seed(config.seed, 1));
  GeneratorParams gen = init_generator(config.generator, derive_seed(config.seed, 2));
  Optimizer opt(config.mle_optimizer, gen.values);
  for (int e = 1; e <= config.pretrain_g_epochs; ++e) {
    const double loss = mle_epoch(gen, opt, data, config.batch_g, rng);
    if (log) log->record({{"phase", "MLE"}, {"epoch", TrainingLog::num(std::int64_t{e})}, {"loss", TrainingLog::num(loss)}});
  }
  return gen;
}

NegativeBatch generate_negatives(const GeneratorParams& gen, std::span<const Sequence> real, Rng& rng) {
  NegativeBatch out;
  for (const auto& s : real) {
    const Sequence items = strip_padding(s);
    if (items.size() < 2) throw DataError("generate_negatives: sequence needs at least 2 items");
    const std::size_t t = 2 + static_cast<std::size_t>(rng.below(items.size() - 1));  // 1-based, in [2, len]
    Sequence prefix(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(t - 1));
    Sequence fake = prefix;
    fake.push_back(sample_next(gen, prefix, rng));
    out.real.emplace_back(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(t));
    out.fake.push_back(std::move(fake));
  }
  return out;
}

double d_step(DiscriminatorParams& disc, Optimizer& opt, std::span<const Sequence> real,
              std::span<const Sequence> fake) {
  Tape tape(Mode::train, derive_seed(opt.steps(), real.size()));
  Var loss = discriminator_loss(tape, disc, real, fake);
  const double before = static_cast<double>(loss.value()[0]);
  opt.step(disc.values, tape.backward(loss, disc.values));
  return before;
}

double discriminator_accuracy(const DiscriminatorParams& disc, std::span<const Sequence> real,
                              std::span<const Sequence> fake) {
  std::size_t correct = 0;
  for (const auto& s : real) correct += rationality_score(disc, s) > 0.5;
  for (const auto& s : fake) correct += rationality_score(disc, s) < 0.5;
  const auto total = real.size() + fake.size();
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

double combined_reward(std::span<const DiscriminatorParams> discs, std::span<const ItemId> prefix, ItemId item,
                       double lambda) {
  if (discs.empty()) throw ContractError("combined_reward: no discriminator");
  Sequence seq(prefix.begin(), prefix.end());
  seq.push_back(item);
  std::vector<double> rewards;
  rewards.reserve(discs.size());
  for (const auto& d : discs) rewards.push_back(rationality_score(d, seq));
  return q_value(rewards, lambda);
}

namespace {

struct SampledSequence {
  std::unique_ptr<Tape> tape;
  Var logp;
  std::vector<std::size_t> rows, cols;
  std::vector<double> rewards;
};

}  // namespace

GStepResult g_step(GeneratorParams& gen, Optimizer& opt, std::span<const DiscriminatorParams> discs,
                   std::span<const Sequence> batch, double lambda, Rng& rng, Mode mode, bool baseline) {
  if (batch.empty()) throw ContractError("g_step: empty batch");
  GStepResult result;
  std::vector<SampledSequence> samples;
  samples.reserve(batch.size());
  for (const auto& seq : batch) {
    const auto tf = teacher_forcing(seq, gen.config.attention.window);
    SampledSequence s;
    s.tape = std::make_unique<Tape>(mode, rng.next());
    s.logp = log_softmax_rows(forward_all_positions(*s.tape, gen, tf.inputs));
    const Tensor& lp = s.logp.value();
    std::vector<double> probs(lp.cols());
    for (std::size_t t = 0; t < tf.inputs.size(); ++t) {
      if (tf.inputs[t] == kPadItem) continue;
      const auto row = lp.row(t);
      for (std::size_t c = 0; c < probs.size(); ++c) probs[c] = std::exp(static_cast<double>(row[c]));
      const std::size_t c = sample_index(probs, rng);
      const Sequence prefix = strip_padding(std::span<const ItemId>(tf.inputs).first(t + 1));
      const double q = combined_reward(discs, prefix, static_cast<ItemId>(c + 1), lambda);
      s.rows.push_back(t);
      s.cols.push_back(c);
      s.rewards.push_back(q);
      result.objective += q * static_cast<double>(row[c]);
      result.mean_reward += q;
      ++result.positions;
    }
    samples.push_back(std::move(s));
  }
  const double positions = static_cast<double>(result.positions);
  result.objective /= positions;
  result.mean_reward /= positions;

  const double shift = baseline ? result.mean_reward : 0.0;
  GradientSet acc(gen.values);
  for (auto& s : samples) {
    Tensor weights({s.rewards.size()});
    for (std::size_t i = 0; i < s.rewards.size(); ++i) weights[i] = static_cast<Real>(s.rewards[i] - shift);
    Var surrogate = sum(mul_const(pick(s.logp, s.rows, s.cols), weights));
    acc.add(s.tape->backward(surrogate, gen.values));
  }
  // ascent on the surrogate = descent on its negative
  acc.scale(static_cast<Real>(-1.0 / positions));
  opt.step(gen.values, acc);
  return result;
}

namespace {

Var last_log_probs(Tape& tape, const GeneratorParams& gen, std::span<const ItemId> prefix) {
  const Sequence items = strip_padding(prefix);
  if (items.empty()) throw DataError("policy gradient: prefix has no real item");
  const auto n = static_cast<std::size_t>(gen.config.attention.window);
  const Sequence window = window_pad(items, gen.config.attention.window);
  return log_softmax_rows(slice_rows(forward_all_positions(tape, gen, window), n - 1, n));
}

}  // namespace

PolicyGradient policy_gradient_estimate(const GeneratorParams& gen, std::span<const DiscriminatorParams> discs,
                                        std::span<const ItemId> prefix, double lambda, Rng& rng) {
  Tape tape(Mode::eval);
  Var logp = last_log_probs(tape, gen, prefix);
  std::vector<double> probs(logp.value().size());
  for (std::size_t c = 0; c < probs.size(); ++c) probs[c] = std::exp(static_cast<double>(logp.value()[c]));
  const std::size_t c = sample_index(probs, rng);
  PolicyGradient out;
  out.action = static_cast<ItemId>(c + 1);
  out.value = combined_reward(discs, strip_padding(prefix), out.action, lambda);
  const std::vector<std::size_t> rows{0}, cols{c};
  out.grad = tape.backward(scale(sum(pick(logp, rows, cols)), static_cast<Real>(out.value)), gen.values);
  return out;
}

PolicyGradient exact_policy_gradient(const GeneratorParams& gen, std::span<const DiscriminatorParams> discs,
                                     std::span<const ItemId> prefix, double lambda) {
  if (gen.config.num_items > 64) throw ContractError("exact_policy_gradient: catalog larger than 64 items");
  const Sequence items = strip_padding(prefix);
  Tape tape(Mode::eval);
  Var probs = softmax_rows(last_log_probs(tape, gen, items));
  Tensor q(probs.value().shape());
  PolicyGradient out;
  for (std::size_t c = 0; c < q.size(); ++c) {
    const double r = combined_reward(discs, items, static_cast<ItemId>(c + 1), lambda);
    q[c] = static_cast<Real>(r);
    out.value += static_cast<double>(probs.value()[c]) * r;
  }
  out.grad = tape.backward(sum(mul_const(probs, q)), gen.values);
  return out;
}

TrainerState init_trainer(const TrainingConfig& config, const std::vector<std::vector<FactorTable>>& tables) {
  config.validate();
  if (tables.empty()) throw ConfigError("at least one discriminator is required");
  TrainerState state;
  state.generator = init_generator(config.generator, derive_seed(config.seed, 2));
  for (std::size_t j = 0; j < tables.size(); ++j) {
    state.discriminators.push_back(init_discriminator(tables[j], config.discriminator, derive_seed(config.seed, 100 + j)));
    state.disc_opts.emplace_back(config.disc_optimizer, state.discriminators.back().values);
  }
  state.mle_opt = Optimizer(config.mle_optimizer, state.generator.values);
  state.adv_opt = Optimizer(config.adv_optimizer, state.generator.values);
  state.rng = Rng(derive_seed(config.seed, 1));
  return state;
}

MetricsReport validate_generator(const GeneratorParams& gen, const DatasetSplit& split, const EvalProtocol& protocol) {
  return evaluate_model(generator_scorer(gen), split, protocol, EvalTarget::validation, "generator");
}

namespace {

/// One D pass: shared negatives per batch, then one step per discriminator.
std::vector<double> d_pass(TrainerState& state, std::span<const Sequence> data,
                           const std::vector<std::vector<std::size_t>>& batches) {
  std::vector<double> totals(state.discriminators.size(), 0.0);
  for (const auto& idx : batches) {
    const auto real = gather(data, idx);
    const auto neg = generate_negatives(state.generator, real, state.rng);
    for (std::size_t j = 0; j < state.discriminators.size(); ++j)
      totals[j] += d_step(state.discriminators[j], state.disc_opts[j], neg.real, neg.fake);
  }
  for (auto& t : totals) t /= static_cast<double>(std::max<std::size_t>(batches.size(), 1));
  return totals;
}

std::vector<Sequence> held_out_real(const DatasetSplit& split, std::size_t cap) {
  std::vector<Sequence> out;
  for (const auto& row : split.rows) {
    if (out.size() >= cap) break;
    Sequence s = row.valid_prefix();
    s.push_back(row.valid_target);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void adversarial_train(TrainerState& state, const TrainingConfig& config, const DatasetSplit& split,
                       TrainingLog& log, const TrainerHooks& hooks) {
  config.validate();
  const auto data = training_sequences(split);
  if (data.empty()) throw DataError("training split has no sequence with at least 2 items");
  auto unit_done = [&](const std::string& stage) {
    if (hooks.after_unit) hooks.after_unit(state, stage);
    return hooks.should_stop && hooks.should_stop(state);
  };
  using std::int64_t;

  while (state.mle_epochs < config.pretrain_g_epochs) {
    const double loss = mle_epoch(state.generator, state.mle_opt, data, config.batch_g, state.rng);
    ++state.mle_epochs;
    log.record({{"phase", "MLE"}, {"epoch", TrainingLog::num(state.mle_epochs)}, {"loss", TrainingLog::num(loss)}});
    if (state.mle_epochs == config.pretrain_g_epochs) {
      const auto val = validate_generator(state.generator, split, config.validation);
      log.record({{"phase", "VAL"}, {"round", "0"}, {"ndcg", TrainingLog::num(val.ndcg)},
                  {"hr", TrainingLog::num(val.hr)}, {"mrr", TrainingLog::num(val.mrr)}});
      if (unit_done("pretrained")) return;
    } else if (unit_done("mle")) {
      return;
    }
  }
  if (config.pretrain_g_epochs == 0 && state.mle_epochs == 0 && state.d_pretrain_epochs == 0 && state.rounds == 0 &&
      !state.finished) {
    if (hooks.after_unit) hooks.after_unit(state, "pretrained");
  }

  const auto held_out = held_out_real(split, 256);
  while (state.d_pretrain_epochs < config.pretrain_d_epochs) {
    const auto losses = d_pass(state, data, epoch_batches(data.size(), config.batch_d, state.rng));
    ++state.d_pretrain_epochs;
    const auto neg = generate_negatives(state.generator, held_out, state.rng);
    std::vector<std::pair<std::string, std::string>> fields{{"phase", "D"}, {"stage", "pretrain"},
                                                            {"epoch", TrainingLog::num(state.d_pretrain_epochs)}};
    for (std::size_t j = 0; j < state.discriminators.size(); ++j) {
      const auto& d = state.discriminators[j];
      fields.emplace_back("loss." + d.name(), TrainingLog::num(losses[j]));
      fields.emplace_back("accuracy." + d.name(), TrainingLog::num(discriminator_accuracy(d, neg.real, neg.fake)));
    }
    log.record(fields);
    if (unit_done("d_pretrain")) return;
  }

  while (!state.finished && state.rounds < config.rounds) {
    const int64_t round = state.rounds + 1;
    const int g_units = config.g_batches_per_round > 0 ? config.g_batches_per_round : config.g_epochs_per_round;
    for (int e = 1; e <= g_units; ++e) {
      std::vector<std::vector<std::size_t>> batches;
      if (config.g_batches_per_round > 0) {
        batches.push_back(sample_batch(data.size(), static_cast<std::size_t>(config.batch_g), state.rng));
      } else {
        batches = epoch_batches(data.size(), config.batch_g, state.rng);
      }
      double objective = 0, reward = 0;
      std::size_t positions = 0;
      for (const auto& idx : batches) {
        const auto r = g_step(state.generator, state.adv_opt, state.discriminators, gather(data, idx), config.lambda,
                              state.rng, Mode::train, config.reward_baseline);
        objective += r.objective * static_cast<double>(r.positions);
        reward += r.mean_reward * static_cast<double>(r.positions);
        positions += r.positions;
      }
      log.record({{"phase", "G"}, {"round", TrainingLog::num(round)}, {"epoch", TrainingLog::num(int64_t{e})},
                  {"objective", TrainingLog::num(objective / static_cast<double>(positions))},
                  {"mean_reward", TrainingLog::num(reward / static_cast<double>(positions))}});
    }
    const int d_units = config.d_batches_per_round > 0 ? config.d_batches_per_round : config.d_epochs_per_round;
    for (int e = 1; e <= d_units; ++e) {
      std::vector<std::vector<std::size_t>> batches;
      if (config.d_batches_per_round > 0) {
        batches.push_back(sample_batch(data.size(), static_cast<std::size_t>(config.batch_d), state.rng));
      } else {
        batches = epoch_batches(data.size(), config.batch_d, state.rng);
      }
      const auto losses = d_pass(state, data, batches);
      std::vector<std::pair<std::string, std::string>> fields{
          {"phase", "D"}, {"round", TrainingLog::num(round)}, {"epoch", TrainingLog::num(int64_t{e})}};
      for (std::size_t j = 0; j < state.discriminators.size(); ++j)
        fields.emplace_back("loss." + state.discriminators[j].name(), TrainingLog::num(losses[j]));
      log.record(fields);
    }

    const auto val = validate_generator(state.generator, split, config.validation);
    state.rounds = round;
    if (val.ndcg > state.best_ndcg) {
      state.best_ndcg = val.ndcg;
      state.best_round = round;
      state.best_generator = state.generator.values;
      state.stale_rounds = 0;
    } else {
      ++state.stale_rounds;
    }
    log.record({{"phase", "VAL"}, {"round", TrainingLog::num(round)}, {"ndcg", TrainingLog::num(val.ndcg)},
                {"hr", TrainingLog::num(val.hr)}, {"mrr", TrainingLog::num(val.mrr)},
                {"best_round", TrainingLog::num(state.best_round)}});
    if (config.early_stop_rounds > 0 && state.stale_rounds >= config.early_stop_rounds) break;
    if (state.rounds < config.rounds && unit_done("round")) return;
  }

  if (!state.finished) {
    if (state.best_round >= 0) state.generator.values = state.best_generator;
    state.finished = true;
    log.record({{"phase", "DONE"}, {"rounds", TrainingLog::num(state.rounds)},
                {"best_round", TrainingLog::num(state.best_round)}, {"best_ndcg", TrainingLog::num(state.best_ndcg)}});
  }
  unit_done("done");
}

}  // namespace mfgan

namespace mfgan {

std::uint64_t model_digest(const TrainingConfig& config, const std::vector<std::vector<FactorTable>>& tables) {
  Digest h;
  const auto add_attention = [&h](const AttentionConfig& a) {
    h.add(a.d).add(a.heads).add(a.blocks).add(a.window).add(a.causal).add(a.residual).add(a.layer_norm).add(a.ffn());
  };
  h.add("generator").add(config.generator.num_items);
  add_attention(config.generator.attention);
  h.add("discriminator").add(config.discriminator.hidden());
  add_attention(config.discriminator.attention);
  h.add(static_cast<std::int64_t>(tables.size()));
  for (const auto& group : tables) {
    h.add(static_cast<std::int64_t>(group.size()));
    for (const auto& t : group) h.add(t.name).add(to_string(t.kind)).add(t.table_rows);
  }
  return h.value();
}

namespace {

void put_values(CheckpointData& out, const std::string& prefix, const ParameterSet& set) {
  for (std::size_t i = 0; i < set.size(); ++i) out.parameters.emplace_back(prefix + set.name(i), set.value(i));
}

void put_optimizer(CheckpointData& out, const std::string& prefix, const Optimizer& opt, const ParameterSet& set) {
  out.counters.emplace_back(prefix + "steps", opt.steps());
  for (std::size_t i = 0; i < opt.first_moment().size(); ++i) {
    out.optimizer.emplace_back(prefix + "m/" + set.name(i), opt.first_moment()[i]);
    out.optimizer.emplace_back(prefix + "v/" + set.name(i), opt.second_moment()[i]);
  }
}

void get_values(const CheckpointData& in, const std::string& prefix, ParameterSet& set) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Tensor& t = in.parameter(prefix + set.name(i));
    if (t.shape() != set.value(i).shape()) {
      throw CheckpointError("parameter " + prefix + set.name(i) + " has shape " + shape_string(t.shape()) +
                            ", expected " + shape_string(set.value(i).shape()));
    }
    set.value(i) = t;
  }
}

void get_optimizer(const CheckpointData& in, const std::string& prefix, Optimizer& opt, const ParameterSet& set) {
  std::vector<Tensor> m, v;
  for (std::size_t i = 0; i < opt.first_moment().size(); ++i) {
    m.push_back(in.optimizer_tensor(prefix + "m/" + set.name(i)));
    v.push_back(in.optimizer_tensor(prefix + "v/" + set.name(i)));
  }
  opt.restore(in.counter(prefix + "steps"), std::move(m), std::move(v));
}

std::string disc_prefix(std::size_t j) { return "disc" + std::to_string(j) + "/"; }

}  // namespace

CheckpointData trainer_checkpoint(const TrainerState& state, std::uint64_t digest) {
  CheckpointData out;
  out.config_digest = digest;
  put_values(out, "generator/", state.generator.values);
  for (std::size_t j = 0; j < state.discriminators.size(); ++j)
    put_values(out, disc_prefix(j), state.discriminators[j].values);
  if (state.best_round >= 0) put_values(out, "best/", state.best_generator);
  put_optimizer(out, "opt.mle/", state.mle_opt, state.generator.values);
  put_optimizer(out, "opt.adv/", state.adv_opt, state.generator.values);
  for (std::size_t j = 0; j < state.disc_opts.size(); ++j)
    put_optimizer(out, "opt." + disc_prefix(j), state.disc_opts[j], state.discriminators[j].values);
  out.counters.emplace_back("discriminators", static_cast<std::int64_t>(state.discriminators.size()));
  out.counters.emplace_back("mle_epochs", state.mle_epochs);
  out.counters.emplace_back("d_pretrain_epochs", state.d_pretrain_epochs);
  out.counters.emplace_back("rounds", state.rounds);
  out.counters.emplace_back("stale_rounds", state.stale_rounds);
  out.counters.emplace_back("best_round", state.best_round);
  out.counters.emplace_back("finished", state.finished ? 1 : 0);
  out.counters.emplace_back("log_bytes", state.log_bytes);
  out.scalars.emplace_back("best_ndcg", state.best_ndcg);
  out.rng_state = state.rng.state();
  return out;
}

void restore_generator(GeneratorParams& gen, const CheckpointData& data) { get_values(data, "generator/", gen.values); }

void restore_discriminators(std::vector<DiscriminatorParams>& discs, const CheckpointData& data) {
  if (data.counter("discriminators") != static_cast<std::int64_t>(discs.size()))
    throw CheckpointError("checkpoint holds a different number of discriminators");
  for (std::size_t j = 0; j < discs.size(); ++j) get_values(data, disc_prefix(j), discs[j].values);
}

void restore_trainer(TrainerState& state, const CheckpointData& data) {
  restore_generator(state.generator, data);
  restore_discriminators(state.discriminators, data);
  state.best_round = data.counter("best_round");
  if (state.best_round >= 0) {
    state.best_generator = state.generator.values;
    get_values(data, "best/", state.best_generator);
  } else {
    state.best_generator = ParameterSet{};
  }
  get_optimizer(data, "opt.mle/", state.mle_opt, state.generator.values);
  get_optimizer(data, "opt.adv/", state.adv_opt, state.generator.values);
  for (std::size_t j = 0; j < state.disc_opts.size(); ++j)
    get_optimizer(data, "opt." + disc_prefix(j), state.disc_opts[j], state.discriminators[j].values);
  state.mle_epochs = data.counter("mle_epochs");
  state.d_pretrain_epochs = data.counter("d_pretrain_epochs");
  state.rounds = data.counter("rounds");
  state.stale_rounds = data.counter("stale_rounds");
  state.finished = data.counter("finished") != 0;
  state.log_bytes = data.counter("log_bytes");
  state.best_ndcg = data.scalar("best_ndcg");
  state.rng.set_state(data.rng_state);
}

}  // namespace mfgan
