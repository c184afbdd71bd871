#include <CLI11.hpp>
#include <iostream>

#include "mfgan/app.hpp"
#include "mfgan/errors.hpp"
#include "mfgan/synthetic.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kRuntime = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", c.config, "run configuration file");
  if (needs_config) opt->required();
  cmd->add_option("--seed", c.seed, "override the configured seed");
  cmd->add_option("--out", c.out, "override the output directory");
  cmd->add_option("--checkpoint", c.checkpoint, "checkpoint file");
}

mfgan::RunConfig load(const Common& c) {
  auto config = mfgan::read_run_config(c.config);
  if (c.seed) config.seed = *c.seed;
  if (!c.out.empty()) config.out = c.out;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-factor adversarial sequential recommender"};
  app.require_subcommand(1);

  Common common;
  auto* prep = app.add_subcommand("prep", "ingest, filter, split and bin a dataset");
  add_common(prep, common);

  mfgan::TrainOptions train_options;
  auto* train = app.add_subcommand("train", "pretrain and adversarially train");
  add_common(train, common);
  train->add_flag("--resume", train_options.resume, "continue from checkpoints/last.ckpt");
  train->add_option("--stop-after", train_options.stop_after, "stop after this many units of work");

  auto* evaluate = app.add_subcommand("evaluate", "rank held-out items against sampled negatives");
  add_common(evaluate, common);
  bool baseline_only = false;
  evaluate->add_flag("--baseline-only", baseline_only, "evaluate PopRec without a checkpoint");

  std::vector<std::string> sequences;
  auto* attribute = app.add_subcommand("attribute", "export per-factor discriminator scores");
  add_common(attribute, common);
  attribute->add_option("--sequences", sequences, "raw user ids to export (default: first five users)")->delimiter(',');

  mfgan::SyntheticConfig synth_config;
  std::string synth_out = "synthetic";
  auto* synth = app.add_subcommand("synth", "write a synthetic factor-driven dataset");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--users", synth_config.users, "number of users");
  synth->add_option("--items", synth_config.items, "number of items");
  synth->add_option("--categories", synth_config.categories, "number of hidden categories");
  synth->add_option("--min-length", synth_config.min_length, "shortest sequence");
  synth->add_option("--max-length", synth_config.max_length, "longest sequence");
  synth->add_option("--follow", synth_config.follow, "probability of the successor category");
  synth->add_option("--seed", synth_config.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*synth) {
      mfgan::write_synthetic(mfgan::make_synthetic(synth_config), synth_out);
      std::cout << "wrote " << synth_out << "/interactions.tsv and " << synth_out << "/factors.tsv\n";
      return kOk;
    }
    const auto config = load(common);
    const mfgan::RunPaths paths{config.out};
    if (*prep) {
      mfgan::run_prep(config, std::cout);
    } else if (*train) {
      mfgan::run_train(config, train_options, std::cout);
    } else if (*evaluate) {
      std::filesystem::path ck = common.checkpoint.empty() ? paths.final_checkpoint() : std::filesystem::path(common.checkpoint);
      if (baseline_only) ck.clear();
      mfgan::run_evaluate(config, ck, std::cout);
    } else if (*attribute) {
      const std::filesystem::path ck = common.checkpoint.empty() ? paths.final_checkpoint() : std::filesystem::path(common.checkpoint);
      mfgan::run_attribute(config, ck, sequences, std::cout);
    }
    return kOk;
  } catch (const mfgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const mfgan::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
