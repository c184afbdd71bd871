#include "mfgan/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "mfgan/errors.hpp"

namespace mfgan {

Variant parse_variant(const std::string& text) {
  if (text == "full") return Variant::full;
  if (text == "sdsf") return Variant::sdsf;
  if (text == "sdaf") return Variant::sdaf;
  if (text == "uni-d") return Variant::uni_d;
  throw ConfigError("unknown variant '" + text + "' (expected full, sdsf, sdaf or uni-d)");
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::sdsf: return "sdsf";
    case Variant::sdaf: return "sdaf";
    case Variant::uni_d: return "uni-d";
  }
  return "full";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(out)) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int narrow(const std::string& key, std::int64_t v) {
  if (v < -(std::int64_t{1} << 31) || v >= (std::int64_t{1} << 31)) throw ConfigError(key + ": value out of range");
  return static_cast<int>(v);
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::filesystem::path&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class M>
Field int_field(M RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v, const std::filesystem::path&) {
            if constexpr (std::is_same_v<M, int>) c.*member = narrow("value", to_int("value", v));
            else c.*member = static_cast<M>(to_int("value", v));
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(double RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v, const std::filesystem::path&) { c.*member = to_double("value", v); },
          [member](const RunConfig& c) { return fmt(c.*member); }};
}

Field path_field(std::filesystem::path RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v, const std::filesystem::path& base) {
            std::filesystem::path p(v);
            if (!v.empty() && p.is_relative() && !base.empty()) p = base / p;
            c.*member = v.empty() ? std::filesystem::path{} : p.lexically_normal();
          },
          [member](const RunConfig& c) { return (c.*member).string(); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"interactions", path_field(&RunConfig::interactions)},
      {"factors_file", path_field(&RunConfig::factors_file)},
      {"factors",
       {[](RunConfig& c, const std::string& v, const std::filesystem::path&) { c.factors = parse_factor_specs(v); },
        [](const RunConfig& c) { return format_factor_specs(c.factors); }}},
      {"k_core", int_field(&RunConfig::k_core)},
      {"max_users", int_field(&RunConfig::max_users)},
      {"out", path_field(&RunConfig::out)},
      {"window", int_field(&RunConfig::window)},
      {"d", int_field(&RunConfig::d)},
      {"heads", int_field(&RunConfig::heads)},
      {"gen_blocks", int_field(&RunConfig::gen_blocks)},
      {"dropout", double_field(&RunConfig::dropout)},
      {"optimizer",
       {[](RunConfig& c, const std::string& v, const std::filesystem::path&) { c.optimizer = parse_optimizer_kind(v); },
        [](const RunConfig& c) { return std::string(to_string(c.optimizer)); }}},
      {"adam_beta1", double_field(&RunConfig::adam_beta1)},
      {"adam_beta2", double_field(&RunConfig::adam_beta2)},
      {"adam_eps", double_field(&RunConfig::adam_eps)},
      {"lr", double_field(&RunConfig::lr)},
      {"adv_lr", double_field(&RunConfig::adv_lr)},
      {"disc_lr", double_field(&RunConfig::disc_lr)},
      {"batch_g", int_field(&RunConfig::batch_g)},
      {"batch_d", int_field(&RunConfig::batch_d)},
      {"pretrain_g_epochs", int_field(&RunConfig::pretrain_g_epochs)},
      {"pretrain_d_epochs", int_field(&RunConfig::pretrain_d_epochs)},
      {"rounds", int_field(&RunConfig::rounds)},
      {"g_epochs_per_round", int_field(&RunConfig::g_epochs_per_round)},
      {"d_epochs_per_round", int_field(&RunConfig::d_epochs_per_round)},
      {"g_batches_per_round", int_field(&RunConfig::g_batches_per_round)},
      {"d_batches_per_round", int_field(&RunConfig::d_batches_per_round)},
      {"lambda_mode",
       {[](RunConfig& c, const std::string& v, const std::filesystem::path&) { c.lambda_mode = parse_lambda_mode(v); },
        [](const RunConfig& c) { return std::string(to_string(c.lambda_mode)); }}},
      {"lambda", double_field(&RunConfig::lambda)},
      {"reward_baseline",
       {[](RunConfig& c, const std::string& v, const std::filesystem::path&) {
          c.reward_baseline = to_bool("reward_baseline", v);
        },
        [](const RunConfig& c) { return std::string(c.reward_baseline ? "true" : "false"); }}},
      {"early_stop_rounds", int_field(&RunConfig::early_stop_rounds)},
      {"variant",
       {[](RunConfig& c, const std::string& v, const std::filesystem::path&) { c.variant = parse_variant(v); },
        [](const RunConfig& c) { return std::string(to_string(c.variant)); }}},
      {"eval_negatives", int_field(&RunConfig::eval_negatives)},
      {"eval_k", int_field(&RunConfig::eval_k)},
      {"seed",
       {[](RunConfig& c, const std::string& v, const std::filesystem::path&) {
          std::uint64_t out = 0;
          const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
          if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError("seed: expected an unsigned integer");
          c.seed = out;
        },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
  };
  return table;
}

}  // namespace

std::vector<FactorSpec> parse_factor_specs(const std::string& text) {
  std::vector<FactorSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::vector<std::string> parts;
    std::stringstream ps(item);
    std::string part;
    while (std::getline(ps, part, ':')) parts.push_back(trim(part));
    if (parts.size() < 2 || parts.size() > 3 || parts[0].empty())
      throw ConfigError("factors: expected name:kind[:bins], got '" + item + "'");
    FactorSpec spec;
    spec.name = parts[0];
    try {
      spec.kind = parse_factor_kind(parts[1]);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("factors: ") + e.what());
    }
    if (parts.size() == 3) {
      if (spec.kind != FactorKind::numeric) throw ConfigError("factors: only numeric factors take a bin count");
      spec.num_bins = narrow("factors", to_int("factors", parts[2]));
    }
    if (spec.kind == FactorKind::item_id) spec.num_bins = 0;
    if (spec.kind == FactorKind::categorical) spec.num_bins = 0;
    for (const auto& s : out)
      if (s.name == spec.name) throw ConfigError("factors: duplicate factor '" + spec.name + "'");
    out.push_back(spec);
  }
  if (out.empty()) throw ConfigError("factors: at least one factor is required");
  return out;
}

std::string format_factor_specs(const std::vector<FactorSpec>& specs) {
  std::string out;
  for (const auto& s : specs) {
    if (!out.empty()) out += ", ";
    out += s.name + ":" + (s.kind == FactorKind::item_id ? std::string("item-id") : std::string(to_string(s.kind)));
    if (s.kind == FactorKind::numeric) out += ":" + std::to_string(s.num_bins);
  }
  return out;
}

void RunConfig::validate() const {
  if (k_core < 1) throw ConfigError("k_core must be >= 1");
  if (max_users < 0) throw ConfigError("max_users must be >= 0");
  if (window < 2) throw ConfigError("window must be >= 2");
  if (d < 1 || heads < 1 || d % heads != 0) throw ConfigError("d must be a positive multiple of heads");
  if (gen_blocks < 1) throw ConfigError("gen_blocks must be >= 1");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must be in [0, 1)");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1) || !(adam_eps > 0))
    throw ConfigError("Adam betas must be in [0, 1) and eps positive");
  for (const auto& s : factors) {
    if (s.kind == FactorKind::numeric && s.num_bins < 2)
      throw ConfigError("factor " + s.name + ": numeric factors need at least 2 bins");
  }
  if (eval_k < 1 || eval_negatives < 1) throw ConfigError("eval_k and eval_negatives must be >= 1");
  if (out.empty()) throw ConfigError("out must be set");
  training_config(*this, 1).validate();
}

RunConfig parse_run_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::map<std::string, int> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (seen.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    seen[key] = line_no;
    bool known = false;
    for (const auto& [name, field] : fields()) {
      if (name != key) continue;
      known = true;
      try {
        field.set(config, value, base_dir);
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + key + ": " + e.what());
      }
    }
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_run_config(in, path.string(), path.parent_path());
}

std::string format_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(config) + "\n";
  return out;
}

TrainingConfig training_config(const RunConfig& c, int num_items) {
  TrainingConfig t;
  t.generator.num_items = num_items;
  t.generator.attention = AttentionConfig{.d = c.d,
                                          .heads = c.heads,
                                          .blocks = c.gen_blocks,
                                          .window = c.window,
                                          .causal = true,
                                          .dropout = static_cast<Real>(c.dropout)};
  t.discriminator.attention = AttentionConfig{.d = c.d,
                                              .heads = c.heads,
                                              .blocks = 1,
                                              .window = c.window,
                                              .causal = c.variant == Variant::uni_d,
                                              .dropout = static_cast<Real>(c.dropout)};
  const OptimizerConfig base{.kind = c.optimizer, .lr = c.lr, .beta1 = c.adam_beta1, .beta2 = c.adam_beta2, .eps = c.adam_eps};
  t.mle_optimizer = base;
  t.adv_optimizer = base;
  t.adv_optimizer.lr = c.adv_lr;
  t.disc_optimizer = base;
  t.disc_optimizer.lr = c.disc_lr;
  t.batch_g = c.batch_g;
  t.batch_d = c.batch_d;
  t.pretrain_g_epochs = c.pretrain_g_epochs;
  t.pretrain_d_epochs = c.pretrain_d_epochs;
  t.rounds = c.rounds;
  t.g_epochs_per_round = c.g_epochs_per_round;
  t.d_epochs_per_round = c.d_epochs_per_round;
  t.g_batches_per_round = c.g_batches_per_round;
  t.d_batches_per_round = c.d_batches_per_round;
  t.lambda = CombinationParams::from_mode(c.lambda_mode, c.lambda).lambda;
  t.reward_baseline = c.reward_baseline;
  t.early_stop_rounds = c.early_stop_rounds;
  t.validation = EvalProtocol{.negatives = c.eval_negatives, .cutoff = c.eval_k, .seed = derive_seed(c.seed, 7)};
  t.seed = c.seed;
  return t;
}

std::vector<std::vector<FactorTable>> discriminator_tables(const RunConfig& config,
                                                           const std::vector<FactorTable>& tables) {
  std::vector<std::vector<FactorTable>> out;
  switch (config.variant) {
    case Variant::full:
    case Variant::uni_d:
      for (const auto& t : tables) out.push_back({t});
      break;
    case Variant::sdaf:
      out.push_back(tables);
      break;
    case Variant::sdsf: {
      for (const auto& t : tables)
        if (t.kind == FactorKind::item_id) out.push_back({t});
      if (out.empty()) throw ConfigError("variant sdsf needs an item-id factor");
      break;
    }
  }
  if (out.empty() || out.front().empty()) throw ConfigError("no discriminator factors configured");
  return out;
}

}  // namespace mfgan
