#include "mfgan/app.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "mfgan/checkpoint.hpp"
#include "mfgan/errors.hpp"
#include "mfgan/trainer.hpp"

namespace mfgan {

namespace {

std::ofstream open_text(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void echo_config(const RunConfig& config) {
  auto out = open_text(RunPaths{config.out}.effective_config());
  out << format_run_config(config);
}

Manifest load_manifest(const RunConfig& config) {
  const auto dir = RunPaths{config.out}.manifest();
  if (!std::filesystem::exists(dir / "stats.tsv"))
    throw DataError("no manifest in " + dir.string() + " (run prep first)");
  return read_manifest(dir);
}

struct Model {
  Manifest manifest;
  TrainingConfig training;
  std::vector<std::vector<FactorTable>> groups;
  std::uint64_t digest = 0;
};

Model load_model(const RunConfig& config) {
  Model m;
  m.manifest = load_manifest(config);
  m.training = training_config(config, m.manifest.split.num_items());
  m.training.validate();
  m.groups = discriminator_tables(config, m.manifest.tables);
  m.digest = model_digest(m.training, m.groups);
  return m;
}

}  // namespace

Manifest run_prep(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.interactions.empty()) throw ConfigError("interactions path is not set");
  IngestReport report;
  auto records = ingest_interactions(config.interactions, &report);
  if (report.malformed) out << "skipped " << report.malformed << " malformed line(s) in " << config.interactions.string() << '\n';
  records = subsample_users(std::move(records), static_cast<std::size_t>(config.max_users), derive_seed(config.seed, 3));
  records = k_core_filter(std::move(records), config.k_core);
  if (records.empty()) throw DataError("no interactions survive " + std::to_string(config.k_core) + "-core filtering");
  const auto sequences = build_user_sequences(records);

  Manifest manifest;
  manifest.split = leave_one_out_split(sequences);
  if (manifest.split.rows.empty()) throw DataError("no user has at least 3 interactions");
  std::optional<FactorFile> file;
  if (!config.factors_file.empty()) file = read_factor_file(config.factors_file);
  auto build = build_factor_tables(manifest.split, config.factors, file ? &*file : nullptr);
  for (const auto& w : build.warnings) out << "warning: " << w << '\n';
  manifest.bins = std::move(build.bins);
  manifest.tables = std::move(build.tables);
  write_manifest(manifest, RunPaths{config.out}.manifest());
  echo_config(config);

  const auto s = dataset_stats(manifest);
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %10s %10s %14s %8s\n", "Dataset", "#users", "#items", "#interactions", "#factors");
  out << line;
  std::snprintf(line, sizeof line, "%-14s %10zu %10zu %14zu %8zu\n", config.interactions.stem().string().c_str(), s.users,
                s.items, s.interactions, s.factors);
  out << line;
  return manifest;
}

void run_train(const RunConfig& config, const TrainOptions& options, std::ostream& out) {
  config.validate();
  const RunPaths paths{config.out};
  const Model model = load_model(config);
  TrainerState state = init_trainer(model.training, model.groups);

  const bool resuming = options.resume && std::filesystem::exists(paths.last_checkpoint());
  if (resuming) {
    restore_trainer(state, load_checkpoint(paths.last_checkpoint(), model.digest));
    if (!std::filesystem::exists(paths.train_log()) ||
        std::filesystem::file_size(paths.train_log()) < static_cast<std::uintmax_t>(state.log_bytes))
      throw CheckpointError("training log is shorter than the checkpoint records");
    std::filesystem::resize_file(paths.train_log(), static_cast<std::uintmax_t>(state.log_bytes));
    out << "resuming: " << state.mle_epochs << " MLE epochs, " << state.d_pretrain_epochs
        << " discriminator epochs, " << state.rounds << " rounds done\n";
  } else {
    std::filesystem::remove(paths.pretrain_checkpoint());
    std::filesystem::remove(paths.final_checkpoint());
    std::filesystem::remove(paths.last_checkpoint());
  }
  echo_config(config);
  std::filesystem::create_directories(paths.checkpoints());
  auto log_file = open_text(paths.train_log(), resuming ? std::ios::app : std::ios::trunc);
  TrainingLog log(&log_file);

  std::int64_t units = 0;
  TrainerHooks hooks;
  hooks.after_unit = [&](const TrainerState&, const std::string& stage) {
    log_file.flush();
    state.log_bytes = static_cast<std::int64_t>(std::filesystem::file_size(paths.train_log()));
    const auto ck = trainer_checkpoint(state, model.digest);
    save_checkpoint(ck, paths.last_checkpoint());
    if (stage == "pretrained") save_checkpoint(ck, paths.pretrain_checkpoint());
    if (stage == "done") save_checkpoint(ck, paths.final_checkpoint());
    ++units;
  };
  hooks.should_stop = [&](const TrainerState&) { return options.stop_after > 0 && units >= options.stop_after; };
  adversarial_train(state, model.training, model.manifest.split, log, hooks);
  if (state.finished) {
    out << "training finished after " << state.rounds << " adversarial round(s); best round " << state.best_round
        << " (validation NDCG@" << config.eval_k << " " << TrainingLog::num(state.best_ndcg) << ")\n";
  } else {
    out << "training stopped after " << units << " unit(s); resume with --resume\n";
  }
}

std::vector<MetricsReport> run_evaluate(const RunConfig& config, const std::filesystem::path& checkpoint,
                                        std::ostream& out) {
  config.validate();
  const Model model = load_model(config);
  const EvalProtocol protocol{.negatives = config.eval_negatives, .cutoff = config.eval_k, .seed = derive_seed(config.seed, 8)};
  std::vector<MetricsReport> reports;
  std::string label = "poprec";
  if (!checkpoint.empty()) {
    const auto data = load_checkpoint(checkpoint, model.digest);
    GeneratorParams gen = init_generator(model.training.generator, 0);
    restore_generator(gen, data);
    reports.push_back(evaluate_model(generator_scorer(gen), model.manifest.split, protocol, EvalTarget::test, "mfgan"));
    label = checkpoint.stem().string();
  }
  reports.push_back(evaluate_model(poprec_baseline(model.manifest.split), model.manifest.split, protocol,
                                   EvalTarget::test, "poprec"));

  const auto dir = RunPaths{config.out}.eval() / label;
  {
    auto f = open_text(dir / "metrics.txt");
    write_report_kv(f, reports);
  }
  {
    auto f = open_text(dir / "metrics_table.txt");
    write_report_table(f, reports);
  }
  for (const auto& r : reports) {
    auto f = open_text(dir / ("per_user_" + r.model + ".tsv"));
    write_per_user(f, r);
  }
  write_report_table(out, reports);
  return reports;
}

std::size_t dominant_factor(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j)
    if (scores[j] > scores[best]) best = j;
  return best;
}

AttributionTable run_attribute(const RunConfig& config, const std::filesystem::path& checkpoint,
                               const std::vector<std::string>& users, std::ostream& out) {
  config.validate();
  const Model model = load_model(config);
  const auto data = load_checkpoint(checkpoint, model.digest);
  std::vector<DiscriminatorParams> discs;
  for (std::size_t j = 0; j < model.groups.size(); ++j)
    discs.push_back(init_discriminator(model.groups[j], model.training.discriminator, 0));
  restore_discriminators(discs, data);

  const auto& split = model.manifest.split;
  std::vector<std::size_t> selected;
  if (users.empty()) {
    for (std::size_t i = 0; i < split.rows.size() && i < 5; ++i) selected.push_back(i);
  } else {
    for (const auto& u : users) {
      std::size_t found = split.rows.size();
      for (std::size_t i = 0; i < split.rows.size(); ++i)
        if (split.users[split.rows[i].user] == u) found = i;
      if (found == split.rows.size()) throw DataError("unknown sequence id '" + u + "'");
      selected.push_back(found);
    }
  }

  AttributionTable table;
  for (const auto& d : discs) table.factors.push_back(d.name());
  for (auto i : selected) {
    const auto& row = split.rows[i];
    const Sequence full = row.full();
    for (std::size_t t = 1; t <= full.size(); ++t) {
      const std::span<const ItemId> prefix(full.data(), t);
      AttributionRow r;
      r.user = split.users[row.user];
      r.position = static_cast<int>(t);
      r.item = split.items[static_cast<std::size_t>(full[t - 1] - 1)];
      for (const auto& d : discs) r.scores.push_back(rationality_score(d, prefix));
      r.dominant = dominant_factor(r.scores);
      table.rows.push_back(std::move(r));
    }
  }
  const auto dir = RunPaths{config.out}.attribution();
  {
    auto f = open_text(dir / "attribution.tsv");
    write_attribution_tsv(f, table);
  }
  {
    auto f = open_text(dir / "attribution.json");
    write_attribution_json(f, table);
  }
  out << "attribution: " << table.rows.size() << " rows for " << selected.size() << " sequence(s) in "
      << dir.string() << '\n';
  return table;
}

void write_attribution_tsv(std::ostream& out, const AttributionTable& table) {
  out << "user\tposition\titem";
  for (const auto& f : table.factors) out << "\tscore." << f;
  out << "\tdominant\n";
  char buf[40];
  for (const auto& r : table.rows) {
    out << r.user << '\t' << r.position << '\t' << r.item;
    for (double s : r.scores) {
      std::snprintf(buf, sizeof buf, "%.9g", s);
      out << '\t' << buf;
    }
    out << '\t' << table.factors[r.dominant] << '\n';
  }
}

void write_attribution_json(std::ostream& out, const AttributionTable& table) {
  nlohmann::ordered_json j;
  j["factors"] = table.factors;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    j["rows"].push_back({{"user", r.user},
                         {"position", r.position},
                         {"item", r.item},
                         {"scores", r.scores},
                         {"dominant", table.factors[r.dominant]}});
  }
  out << j.dump(1) << '\n';
}

}  // namespace mfgan
