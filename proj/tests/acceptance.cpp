// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfgan/data_pipeline.hpp"
#include "mfgan/discriminator.hpp"
#include "mfgan/evaluation.hpp"
#include "mfgan/generator.hpp"
#include "mfgan/reward.hpp"
#include "mfgan/rng.hpp"
#include "mfgan/trainer.hpp"

namespace fs = std::filesystem;
using namespace mfgan;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "ok: " : "FAILED: ") + what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

AttentionConfig attention(int blocks, bool causal, int window = 5, int d = 8) {
  return AttentionConfig{.d = d, .heads = 2, .blocks = blocks, .window = window, .causal = causal, .dropout = 0};
}

FactorTable parity_table(int items) {
  FactorTable t;
  t.name = "parity";
  t.kind = FactorKind::categorical;
  t.row_of_item.push_back(0);
  for (int i = 1; i <= items; ++i) t.row_of_item.push_back(1 + i % 2);
  t.table_rows = 4;
  return t;
}

DiscriminatorConfig disc_config(bool causal, int window = 5) {
  DiscriminatorConfig c;
  c.attention = attention(1, causal, window);
  return c;
}

double model_fd_error(const ParameterSet& values, const GradientSet& analytic,
                      const std::function<double(const ParameterSet&)>& f) {
  return gradient_relative_error(analytic, finite_diff_grad(f, values, 1e-3));
}

// ---------------------------------------------------------------------------

Outcome gradients() {
  Outcome o;
  const auto start = Clock::now();
  const auto gen = init_generator(GeneratorConfig{20, attention(2, true)}, 1);
  for (const Sequence& seq : {Sequence{3, 7, 1, 20, 5, 9, 2}, Sequence{4, 11, 6}, Sequence{2, 2, 2, 2, 2}}) {
    Tape tape(Mode::eval);
    const auto analytic = tape.backward(mle_loss(tape, gen, seq), gen.values);
    const double err = model_fd_error(gen.values, analytic, [&](const ParameterSet& p) {
      GeneratorParams g = gen;
      g.values = p;
      return mle_loss(g, seq);
    });
    o.check(err < 1e-3, "generator likelihood, max rel err " + fmt("%.2e", err));
  }

  const std::vector<FactorTable> tables{item_id_table(20), parity_table(20)};
  const auto disc = init_discriminator(tables, disc_config(false), 2);
  const std::vector<Sequence> real{{1, 2, 3}, {5, 6, 7, 8, 9, 10}};
  const std::vector<Sequence> fake{{1, 2, 19}, {4, 4}};
  {
    Tape tape(Mode::eval);
    const auto analytic = tape.backward(discriminator_loss(tape, disc, real, fake), disc.values);
    const double err = model_fd_error(disc.values, analytic, [&](const ParameterSet& p) {
      DiscriminatorParams d = disc;
      d.values = p;
      return discriminator_loss(d, real, fake);
    });
    o.check(err < 1e-3, "discriminator loss, max rel err " + fmt("%.2e", err));
  }

  std::vector<DiscriminatorParams> discs{init_discriminator({item_id_table(20)}, disc_config(false), 4),
                                         init_discriminator({parity_table(20)}, disc_config(false), 5)};
  for (double lambda : {0.0, 3.0, -2.0}) {
    const Sequence prefix{2, 9, 14};
    const auto exact = exact_policy_gradient(gen, discs, prefix, lambda);
    const double err = model_fd_error(gen.values, exact.grad, [&](const ParameterSet& p) {
      GeneratorParams g = gen;
      g.values = p;
      return exact_policy_gradient(g, discs, prefix, lambda).value;
    });
    o.check(err < 1e-3, "policy objective at lambda " + fmt("%g", lambda) + ", max rel err " + fmt("%.2e", err));
  }
  const double secs = seconds_since(start);
  o.check(secs < 120, "runtime " + fmt("%.1f", secs) + " s");
  return o;
}

// ---------------------------------------------------------------------------

bool same_rows(const Tensor& a, const Tensor& b, std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    const auto x = a.row(r), y = b.row(r);
    if (!std::equal(x.begin(), x.end(), y.begin())) return false;
  }
  return true;
}

double logit_at(const DiscriminatorParams& d, const Sequence& s, int row) {
  Tape tape(Mode::eval, 0, false);
  return static_cast<double>(score_logit(tape, d, s, row).value()[0]);
}

Outcome causality() {
  Outcome o;
  const int n = 5, items = 20;
  const auto gen = init_generator(GeneratorConfig{items, attention(2, true)}, 11);
  const Sequence base{4, 17, 9, 2, 13};
  const Tensor ref = forward_all_positions(gen, base);
  std::size_t cases = 0, leaks = 0;
  for (int s = 1; s < n; ++s) {
    for (ItemId v = 1; v <= items; ++v) {
      if (v == base[s]) continue;
      Sequence w = base;
      w[s] = v;
      ++cases;
      if (!same_rows(ref, forward_all_positions(gen, w), static_cast<std::size_t>(s))) ++leaks;
    }
  }
  o.check(leaks == 0, "generator rows before a perturbed position are bit-identical (" + std::to_string(cases) +
                          " perturbations, " + std::to_string(leaks) + " leaks)");

  auto wide = disc_config(false);
  wide.mlp_hidden = 32;
  const auto bi = init_discriminator({item_id_table(items)}, wide, 4);
  const Sequence a{1, 2, 3, 4, 5}, b{1, 2, 3, 4, 17};
  const double za = logit_at(bi, a, 1), zb = logit_at(bi, b, 1);
  o.check(za != zb, "bidirectional score at row 2 moves when the last item changes (" + fmt("%.6g", za) + " vs " +
                        fmt("%.6g", zb) + ")");

  const Sequence c{9, 2, 3, 4, 5};
  const double early = logit_at(bi, c, -1), late = logit_at(bi, a, -1);
  o.check(early != late, "bidirectional score moves when the first item changes (" + fmt("%.6g", late) + " vs " +
                             fmt("%.6g", early) + ")");

  auto uni_cfg = wide;
  uni_cfg.attention.causal = true;
  const auto uni = init_discriminator({item_id_table(items)}, uni_cfg, 4);
  std::size_t uni_leaks = 0;
  for (int row = 0; row < n - 1; ++row) {
    const double ref_z = logit_at(uni, base, row);
    for (int s = row + 1; s < n; ++s) {
      for (ItemId v = 1; v <= items; ++v) {
        Sequence w = base;
        w[s] = v;
        if (logit_at(uni, w, row) != ref_z) ++uni_leaks;
      }
    }
  }
  o.check(uni_leaks == 0, "uni-directional discriminator is prefix-invariant (" + std::to_string(uni_leaks) + " leaks)");
  return o;
}

// ---------------------------------------------------------------------------

using Big = boost::multiprecision::cpp_bin_float_50;

double q_oracle(const std::vector<double>& y, double lambda) {
  Big num = 0, den = 0;
  for (double v : y) {
    const Big w = boost::multiprecision::exp(Big(lambda) * Big(v));
    num += w * Big(v);
    den += w;
  }
  return static_cast<double>(num / den);
}

Outcome combination() {
  Outcome o;
  Rng rng(31);
  double worst_mean = 0, worst_oracle = 0;
  std::size_t envelope = 0, monotone = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t m = 1 + rng.below(6);
    std::vector<double> y(m);
    for (auto& v : y) v = rng.uniform();
    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(m);
    worst_mean = std::max(worst_mean, std::abs(q_value(y, 0.0) - mean));
    const double lo = *std::min_element(y.begin(), y.end()), hi = *std::max_element(y.begin(), y.end());
    const double lambda = rng.uniform(-50, 50);
    const double q = q_value(y, lambda);
    if (q < lo || q > hi) ++envelope;
    worst_oracle = std::max(worst_oracle, std::abs(q - q_oracle(y, lambda)));
    if (trial < 1000) {
      double prev = -1;
      for (int k = 0; k <= 40; ++k) {
        const double qk = q_value(y, -40.0 + 2.0 * k);
        if (qk < prev) ++monotone;
        prev = qk;
      }
    }
  }
  o.check(worst_mean < 1e-9, "Q(0) equals the mean, worst diff " + fmt("%.2e", worst_mean));
  o.check(worst_oracle < 1e-9, "Q matches a 50-digit oracle, worst diff " + fmt("%.2e", worst_oracle));
  o.check(envelope == 0, "min <= Q <= max on 10^4 random vectors (" + std::to_string(envelope) + " violations)");
  o.check(monotone == 0, "Q non-decreasing on a 41-point grid over 1000 vectors (" + std::to_string(monotone) +
                             " violations)");
  const std::vector<double> y{0.2, 0.8};
  const double qmax = q_value(y, 40), qmin = q_value(y, -40);
  o.check(std::abs(qmax - 0.8) < 1e-6 && std::abs(qmin - 0.2) < 1e-6,
          "Q(+40)=" + fmt("%.12g", qmax) + ", Q(-40)=" + fmt("%.12g", qmin) + " on (0.2, 0.8)");
  return o;
}

// ---------------------------------------------------------------------------

Outcome unbiasedness() {
  Outcome o;
  const auto start = Clock::now();
  const int items = 5, n = 3;
  const auto gen = init_generator(GeneratorConfig{items, attention(2, true, n)}, 21);
  std::vector<DiscriminatorParams> discs{init_discriminator({item_id_table(items)}, disc_config(false, n), 22),
                                         init_discriminator({parity_table(items)}, disc_config(false, n), 23)};
  const Sequence prefix{3, 1};
  const std::size_t draws = 100000;
  for (double lambda : {0.0, 2.0}) {
    const auto exact = exact_policy_gradient(gen, discs, prefix, lambda);
    std::vector<std::vector<double>> sum(gen.values.size()), sq(gen.values.size());
    for (std::size_t i = 0; i < gen.values.size(); ++i) {
      sum[i].assign(gen.values.value(i).size(), 0.0);
      sq[i].assign(gen.values.value(i).size(), 0.0);
    }
    Rng rng(derive_seed(99, static_cast<std::uint64_t>(lambda * 10)));
    for (std::size_t k = 0; k < draws; ++k) {
      const auto est = policy_gradient_estimate(gen, discs, prefix, lambda, rng);
      for (std::size_t i = 0; i < est.grad.size(); ++i) {
        const auto& g = est.grad[i].storage();
        for (std::size_t c = 0; c < g.size(); ++c) {
          const double v = g[c];
          sum[i][c] += v;
          sq[i][c] += v * v;
        }
      }
    }
    std::size_t components = 0, outside = 0;
    double worst_z = 0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      for (std::size_t c = 0; c < sum[i].size(); ++c) {
        const double mean = sum[i][c] / draws;
        const double var = std::max(0.0, sq[i][c] / draws - mean * mean) * draws / (draws - 1);
        const double se = std::sqrt(var / draws);
        const double diff = std::abs(mean - static_cast<double>(exact.grad[i].storage()[c]));
        ++components;
        if (diff > 3 * se + 1e-12) ++outside;
        if (se > 0) worst_z = std::max(worst_z, diff / se);
      }
    }
    o.check(outside == 0, "lambda " + fmt("%g", lambda) + ": " + std::to_string(components) +
                              " components within 3 SE (" + std::to_string(outside) + " outside, worst z " +
                              fmt("%.2f", worst_z) + ")");
  }
  const double secs = seconds_since(start);
  o.check(secs < 300, "runtime " + fmt("%.1f", secs) + " s");
  return o;
}

// ---------------------------------------------------------------------------

Outcome metrics() {
  Outcome o;
  const auto r1 = compute_metrics(1), r3 = compute_metrics(3), r11 = compute_metrics(11);
  o.check(r1.ndcg == 1.0 && r1.hr == 1.0 && r1.rr == 1.0, "rank 1 gives 1/1/1");
  o.check(std::abs(r3.ndcg - 0.5) < 1e-12 && r3.hr == 1.0 && std::abs(r3.rr - 1.0 / 3) < 1e-12,
          "rank 3 gives NDCG 0.5, HR 1, RR 1/3");
  o.check(r11.ndcg == 0.0 && r11.hr == 0.0 && std::abs(r11.rr - 1.0 / 11) < 1e-12, "rank 11 gives 0/0/(1/11)");

  Rng rng(41);
  const int draws = 2000;
  int hits = 0;
  for (int k = 0; k < draws; ++k) {
    const double pos = rng.uniform();
    std::vector<double> neg(100);
    for (auto& v : neg) v = rng.uniform();
    if (compute_metrics(rank_of_positive(pos, neg)).hr == 1.0) ++hits;
  }
  const double p = 10.0 / 101, hr = static_cast<double>(hits) / draws;
  const double sigma = std::sqrt(p * (1 - p) / draws);
  o.check(std::abs(hr - p) <= 3 * sigma,
          "random scorer HR@10 " + fmt("%.4f", hr) + " vs " + fmt("%.4f", p) + " (3 sigma " + fmt("%.4f", 3 * sigma) + ")");

  o.check(rank_of_positive(0.5, std::vector<double>{0.5, 0.5, 0.1}) == 3, "ties with two negatives rank below both");
  o.check(rank_of_positive(0.5, std::vector<double>{0.1, 0.2}) == 1, "no ties, rank 1");
  std::vector<double> all_tied(100, 0.7);
  o.check(rank_of_positive(0.7, all_tied) == 101, "all-tied candidates give the last rank");
  return o;
}

// ---------------------------------------------------------------------------

std::vector<InteractionRecord> kcore_oracle(const std::vector<InteractionRecord>& records, int k) {
  std::vector<bool> alive(records.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::string, int> users, items;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!alive[i]) continue;
      ++users[records[i].user];
      ++items[records[i].item];
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (alive[i] && (users[records[i].user] < k || items[records[i].item] < k)) {
        alive[i] = false;
        changed = true;
      }
    }
  }
  std::vector<InteractionRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (alive[i]) out.push_back(records[i]);
  return out;
}

bool is_k_core(const std::vector<InteractionRecord>& records, int k) {
  std::map<std::string, int> users, items;
  for (const auto& r : records) {
    ++users[r.user];
    ++items[r.item];
  }
  for (const auto& [_, c] : users)
    if (c < k) return false;
  for (const auto& [_, c] : items)
    if (c < k) return false;
  return true;
}

std::vector<InteractionRecord> random_records(Rng& rng, int users, int items, int count) {
  std::vector<InteractionRecord> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({"u" + std::to_string(rng.below(users)), "i" + std::to_string(rng.below(items)),
                   static_cast<std::int64_t>(rng.below(1000))});
  }
  return out;
}

Outcome pipeline() {
  Outcome o;
  std::vector<InteractionRecord> toy;
  for (const auto& [u, is] : std::vector<std::pair<std::string, std::string>>{
           {"a", "xyzw"}, {"b", "xyz"}, {"c", "xyv"}, {"d", "w"}}) {
    std::int64_t t = 0;
    for (char c : is) toy.push_back({u, std::string(1, c), t++});
  }
  std::size_t instances = 0, bad = 0;
  Rng rng(61);
  std::vector<std::pair<std::vector<InteractionRecord>, int>> cases{{toy, 2}, {toy, 3}};
  for (int t = 0; t < 200; ++t) {
    cases.emplace_back(random_records(rng, 5 + static_cast<int>(rng.below(40)), 5 + static_cast<int>(rng.below(40)),
                                      20 + static_cast<int>(rng.below(600))),
                       1 + static_cast<int>(rng.below(6)));
  }
  for (const auto& [records, k] : cases) {
    ++instances;
    const auto once = k_core_filter(records, k);
    const bool ok = is_k_core(once, k) && once == kcore_oracle(records, k) && k_core_filter(once, k) == once;
    if (!ok) ++bad;
  }
  const auto toy2 = k_core_filter(toy, 2);
  std::set<std::string> toy_users;
  for (const auto& r : toy2) toy_users.insert(r.user);
  o.check(toy_users == std::set<std::string>{"a", "b", "c"}, "toy 2-core drops the single-item user");
  o.check(bad == 0, "k-core is a verified fixed point, matches an independent pruning oracle and is idempotent on " +
                        std::to_string(instances) + " instances (" + std::to_string(bad) + " failures)");

  std::size_t users = 0, split_bad = 0, dropped = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<UserSequence> seqs;
    for (int u = 0; u < 30; ++u) {
      UserSequence s;
      s.user = "u" + std::to_string(t) + "_" + std::to_string(u);
      const auto len = rng.below(12);
      for (std::uint64_t i = 0; i < len; ++i) s.items.push_back("i" + std::to_string(rng.below(25)));
      seqs.push_back(std::move(s));
    }
    const auto split = leave_one_out_split(seqs);
    std::size_t expected_dropped = 0;
    std::size_t next = 0;
    for (const auto& s : seqs) {
      if (s.items.size() < 3) {
        ++expected_dropped;
        continue;
      }
      ++users;
      if (next >= split.rows.size()) {
        ++split_bad;
        continue;
      }
      const auto& row = split.rows[next++];
      const auto raw = [&](ItemId id) { return split.items.at(static_cast<std::size_t>(id) - 1); };
      const std::size_t len = s.items.size();
      bool ok = split.users.at(row.user) == s.user && row.train.size() == len - 2 &&
                raw(row.valid_target) == s.items[len - 2] && raw(row.test_target) == s.items[len - 1];
      for (std::size_t i = 0; ok && i + 2 < len; ++i) ok = raw(row.train[i]) == s.items[i];
      ok = ok && row.test_prefix().size() == len - 1 && row.test_prefix().back() == row.valid_target;
      if (!ok) ++split_bad;
    }
    if (next != split.rows.size() || split.dropped_short != expected_dropped) ++split_bad;
    dropped += expected_dropped;
  }
  o.check(split_bad == 0, "leave-one-out indices verified for " + std::to_string(users) + " users (" +
                              std::to_string(dropped) + " short sequences dropped)");

  const char* ml1m = std::getenv("MFGAN_ML1M");
  if (ml1m && fs::exists(ml1m)) {
    const auto records = k_core_filter(ingest_interactions(ml1m), 5);
    const auto split = leave_one_out_split(build_user_sequences(records));
    const bool ok = split.users.size() == 6040 && split.items.size() == 3361 && split.num_interactions() == 996834;
    o.check(ok, "MovieLens-1M counts " + std::to_string(split.users.size()) + " / " +
                    std::to_string(split.items.size()) + " / " + std::to_string(split.num_interactions()));
  } else {
    o.note("MovieLens-1M count check not evaluated: set MFGAN_ML1M to a user/item/timestamp TSV to run it");
  }
  return o;
}

// ---------------------------------------------------------------------------
// CLI-driven checks

std::string g_cli;
fs::path g_work;

bool run(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str()) == 0;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

std::map<std::string, double> read_metrics(const fs::path& file) {
  std::ifstream in(file);
  std::map<std::string, double> out;
  for (const auto& r : parse_report_kv(in)) out[r.model] = r.ndcg;
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double final_quartile_std(const fs::path& log) {
  std::ifstream in(log);
  std::vector<double> obj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("phase=G ", 0) != 0) continue;
    const auto pos = line.find("objective=");
    if (pos != std::string::npos) obj.push_back(std::stod(line.substr(pos + 10)));
  }
  if (obj.size() < 4) return std::nan("");
  const std::vector<double> tail(obj.end() - static_cast<std::ptrdiff_t>(obj.size() / 4), obj.end());
  double mean = 0;
  for (double v : tail) mean += v;
  mean /= static_cast<double>(tail.size());
  double var = 0;
  for (double v : tail) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(tail.size() - 1));
}

const char* kBenchConfig = R"(interactions = data/interactions.tsv
factors_file = data/factors.tsv
factors = category:categorical, popularity:numeric:10, item:item-id
k_core = 5
window = 20
d = 32
heads = 2
dropout = 0.2
batch_g = 128
batch_d = 16
lr = 0.001
adv_lr = 0.0002
disc_lr = 0.003
pretrain_g_epochs = 40
pretrain_d_epochs = 20
rounds = 30
g_batches_per_round = 2
d_batches_per_round = 8
early_stop_rounds = 20
lambda_mode = mean
)";

const char* kToyConfig = R"(interactions = data/interactions.tsv
factors_file = data/factors.tsv
factors = category:categorical, popularity:numeric:4, item:item-id
k_core = 2
window = 10
d = 16
heads = 2
dropout = 0.2
batch_g = 32
batch_d = 8
pretrain_g_epochs = 3
pretrain_d_epochs = 2
rounds = 3
g_batches_per_round = 1
d_batches_per_round = 2
out = run
seed = 5
)";

struct BenchRun {
  double mle = 0, poprec = 0, mfgan = 0, stability = 0;
  bool ok = false;
};

std::vector<BenchRun> g_full, g_sdsf;
double g_bench_seconds = 0;

void run_benchmark() {
  const fs::path dir = g_work / "bench";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto log = dir / "commands.log";
  const auto start = Clock::now();
  if (!run("synth --out \"" + (dir / "data").string() +
               "\" --users 500 --items 100 --min-length 5 --max-length 12 --seed 11",
           log))
    return;
  for (const char* variant : {"full", "sdsf"}) {
    const auto cfg = dir / (std::string(variant) + ".cfg");
    write_file(cfg, std::string(kBenchConfig) + "variant = " + variant + "\n");
    for (int seed = 1; seed <= 5; ++seed) {
      const auto out = dir / (std::string(variant) + "_" + std::to_string(seed));
      const std::string common = "--config \"" + cfg.string() + "\" --out \"" + out.string() + "\" --seed " +
                                 std::to_string(seed);
      BenchRun r;
      r.ok = run("prep " + common, log) && run("train " + common, log);
      if (r.ok && std::string(variant) == "full") {
        r.ok = run("evaluate " + common + " --checkpoint \"" + (out / "checkpoints/pretrain.ckpt").string() + "\"", log) &&
               run("evaluate " + common + " --checkpoint \"" + (out / "checkpoints/final.ckpt").string() + "\"", log);
        if (r.ok) {
          auto pre = read_metrics(out / "eval/pretrain/metrics.txt");
          auto fin = read_metrics(out / "eval/final/metrics.txt");
          r.mle = pre["mfgan"];
          r.poprec = pre["poprec"];
          r.mfgan = fin["mfgan"];
        }
      }
      r.stability = final_quartile_std(out / "train.log");
      (std::string(variant) == "full" ? g_full : g_sdsf).push_back(r);
      if (std::string(variant) == "full") g_bench_seconds = seconds_since(start);
    }
  }
}

Outcome benchmark() {
  Outcome o;
  bool all_ok = g_full.size() == 5;
  for (const auto& r : g_full) all_ok = all_ok && r.ok;
  o.check(all_ok, "five full MFGAN runs completed");
  if (!all_ok) return o;
  std::vector<double> mle, gan;
  bool lift = true;
  for (std::size_t s = 0; s < g_full.size(); ++s) {
    const auto& r = g_full[s];
    o.note("seed " + std::to_string(s + 1) + ": PopRec " + fmt("%.4f", r.poprec) + ", MLE " + fmt("%.4f", r.mle) +
           ", MFGAN " + fmt("%.4f", r.mfgan));
    lift = lift && r.mle > r.poprec;
    mle.push_back(r.mle);
    gan.push_back(r.mfgan);
  }
  o.check(lift, "MLE pretraining beats PopRec on every seed");
  o.check(median(gan) >= median(mle),
          "median NDCG@10 MFGAN " + fmt("%.4f", median(gan)) + " >= MLE " + fmt("%.4f", median(mle)));
  o.check(g_bench_seconds < 1800, "runtime " + fmt("%.0f", g_bench_seconds) + " s");
  return o;
}

Outcome stability() {
  Outcome o;
  o.check(g_full.size() == 5 && g_sdsf.size() == 5, "stability runs completed for both variants");
  if (!o.pass) return o;
  std::ofstream report(g_work / "bench/stability.tsv");
  report << "seed\tfull_m3\tsdsf_m1\n";
  std::vector<double> full, sdsf;
  for (std::size_t s = 0; s < 5; ++s) {
    full.push_back(g_full[s].stability);
    sdsf.push_back(g_sdsf[s].stability);
    report << s + 1 << '\t' << fmt("%.6g", full.back()) << '\t' << fmt("%.6g", sdsf.back()) << '\n';
  }
  bool finite = true;
  for (double v : full) finite = finite && std::isfinite(v);
  for (double v : sdsf) finite = finite && std::isfinite(v);
  o.check(finite, "final-quartile std of the G objective reported for every run (" +
                      (g_work / "bench/stability.tsv").string() + ")");
  o.note("median final-quartile std: m=3 " + fmt("%.5f", median(full)) + ", m=1 " + fmt("%.5f", median(sdsf)) +
         (median(full) <= median(sdsf) ? " (m=3 steadier)" : " (m=1 steadier)"));
  return o;
}

fs::path g_toy;

Outcome reproducibility() {
  Outcome o;
  const fs::path dir = g_work / "toy";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto log = dir / "commands.log";
  if (!run("synth --out \"" + (dir / "data").string() + "\" --users 150 --items 30 --categories 5 --min-length 6 "
           "--max-length 15 --seed 3", log)) {
    o.check(false, "synthetic toy data written");
    return o;
  }
  const auto cfg = dir / "toy.cfg";
  write_file(cfg, kToyConfig);
  const auto pipeline = [&](const fs::path& out) {
    const std::string common = "--config \"" + cfg.string() + "\" --out \"" + out.string() + "\"";
    return run("prep " + common, log) && run("train " + common, log) &&
           run("evaluate " + common + " --checkpoint \"" + (out / "checkpoints/final.ckpt").string() + "\"", log) &&
           run("attribute " + common + " --checkpoint \"" + (out / "checkpoints/final.ckpt").string() + "\"", log);
  };
  const auto run_dir = dir / "run";
  o.check(pipeline(run_dir), "prep, train, evaluate and attribute succeed");
  const auto first = snapshot(run_dir);
  fs::remove_all(run_dir);
  o.check(pipeline(run_dir), "second run succeeds");
  const auto second = snapshot(run_dir);
  o.check(!first.empty() && first == second,
          "rerun is byte-identical across " + std::to_string(first.size()) + " output files");
  g_toy = run_dir;

  const auto resumed = dir / "resumed";
  const std::string common = "--config \"" + cfg.string() + "\" --out \"" + resumed.string() + "\"";
  bool ok = run("prep " + common, log) && run("train " + common + " --stop-after 2", log);
  int resumes = 0;
  while (ok && !fs::exists(resumed / "checkpoints/final.ckpt") && resumes < 1000) {
    ok = run("train " + common + " --resume --stop-after 1", log);
    ++resumes;
  }
  ok = ok && run("evaluate " + common + " --checkpoint \"" + (resumed / "checkpoints/final.ckpt").string() + "\"", log);
  o.check(ok, "interrupted training finished after " + std::to_string(resumes) + " resumes");
  bool same = ok;
  for (const char* f : {"checkpoints/pretrain.ckpt", "checkpoints/last.ckpt", "checkpoints/final.ckpt", "train.log",
                        "eval/final/metrics.txt", "eval/final/per_user_mfgan.tsv"}) {
    const bool eq = first.count(f) && fs::exists(resumed / f) && read_file(resumed / f) == first.at(f);
    if (!eq) o.note(std::string("differs after resume: ") + f);
    same = same && eq;
  }
  o.check(same, "interrupted and resumed training is bit-exact (checkpoints, log, evaluation)");
  return o;
}

Outcome attribution() {
  Outcome o;
  const auto tsv = g_toy / "attribution/attribution.tsv";
  const auto json_path = g_toy / "attribution/attribution.json";
  if (g_toy.empty() || !fs::exists(tsv) || !fs::exists(json_path)) {
    o.check(false, "attribution files exist");
    return o;
  }
  std::ifstream in(tsv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) header.push_back(f);
  }
  const bool header_ok = header.size() >= 5 && header[0] == "user" && header[1] == "position" &&
                         header[2] == "item" && header.back() == "dominant";
  o.check(header_ok, "TSV header has user, position, item, one score column per factor, dominant");
  if (!header_ok) return o;
  const std::size_t m = header.size() - 4;
  std::size_t rows = 0, malformed = 0, range = 0, argmax = 0;
  std::map<std::string, int> last_position;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) f.push_back(cell);
    ++rows;
    if (f.size() != header.size()) {
      ++malformed;
      continue;
    }
    const int pos = std::stoi(f[1]);
    if (pos != last_position[f[0]] + 1) ++malformed;
    last_position[f[0]] = pos;
    std::vector<double> s;
    for (std::size_t j = 0; j < m; ++j) s.push_back(std::stod(f[3 + j]));
    for (double v : s)
      if (!(v > 0 && v < 1)) ++range;
    const double top = *std::max_element(s.begin(), s.end());
    bool found = false;
    for (std::size_t j = 0; j < m; ++j)
      if (s[j] == top && header[3 + j] == "score." + f.back()) found = true;
    if (!found) ++argmax;
  }
  o.check(rows > 0 && malformed == 0, std::to_string(rows) + " well-formed rows for " +
                                          std::to_string(last_position.size()) + " users");
  o.check(range == 0, "all TSV scores in (0,1)");
  o.check(argmax == 0, "TSV dominant column is a rowwise maximum");

  const auto j = nlohmann::json::parse(read_file(json_path));
  const auto& factors = j.at("factors");
  std::size_t json_bad = 0;
  for (const auto& r : j.at("rows")) {
    const auto s = r.at("scores").get<std::vector<double>>();
    if (s.size() != factors.size()) {
      ++json_bad;
      continue;
    }
    const auto best = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
    if (factors[best].get<std::string>() != r.at("dominant").get<std::string>()) ++json_bad;
    for (double v : s)
      if (!(v > 0 && v < 1)) ++json_bad;
  }
  o.check(j.at("rows").size() == rows && json_bad == 0,
          "JSON export matches the TSV row count, dominant equals first rowwise argmax, scores in (0,1)");
  return o;
}

}  // namespace

// usage: acceptance [cli] [work dir] [comma-separated criteria]
int main(int argc, char** argv) {
  g_cli = argc > 1 ? argv[1] : MFGAN_CLI_PATH;
  g_work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "mfgan_acceptance";
  fs::create_directories(g_work);

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"gradient correctness", gradients},
      {"causality and bidirectionality", causality},
      {"lambda combination", combination},
      {"policy-gradient unbiasedness", unbiasedness},
      {"metric oracles", metrics},
      {"pipeline oracles", pipeline},
      {"synthetic benchmark", [] {
         run_benchmark();
         return benchmark();
       }},
      {"stability report", stability},
      {"reproducibility", reproducibility},
      {"attribution export", attribution},
  };

  std::set<std::size_t> only;
  if (argc > 3) {
    std::stringstream ss(argv[3]);
    std::string item;
    while (std::getline(ss, item, ',')) only.insert(std::stoul(item));
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    for (const auto& n : o.notes) std::cout << "    " << n << '\n';
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].name << ") in "
              << fmt("%.1f", seconds_since(start)) << " s\n"
              << std::flush;
    if (!o.pass) ++failures;
  }
  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criterion(s) failed\n"
                         : std::string("acceptance: all criteria passed\n"));
  return failures ? 1 : 0;
}
