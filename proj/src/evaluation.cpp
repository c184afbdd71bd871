#include "mfgan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "mfgan/errors.hpp"

namespace mfgan {

std::vector<ItemId> sample_negatives(int num_items, std::span<const ItemId> interacted, int count, Rng& rng,
                                     std::vector<std::string>* warnings) {
  std::vector<ItemId> pool;
  pool.reserve(static_cast<std::size_t>(num_items));
  for (ItemId id = 1; id <= num_items; ++id)
    if (!std::binary_search(interacted.begin(), interacted.end(), id)) pool.push_back(id);
  const auto want = static_cast<std::size_t>(std::max(count, 0));
  if (pool.size() <= want) {
    if (pool.size() < want && warnings) {
      warnings->push_back("only " + std::to_string(pool.size()) + " negative candidates, wanted " +
                          std::to_string(want));
    }
    return pool;
  }
  for (std::size_t i = 0; i < want; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(want);
  return pool;
}

int rank_of_positive(double positive, std::span<const double> negatives) {
  if (std::isnan(positive)) throw ContractError("rank_of_positive: NaN score");
  int rank = 1;
  for (double s : negatives) {
    if (std::isnan(s)) throw ContractError("rank_of_positive: NaN score");
    if (s >= positive) ++rank;
  }
  return rank;
}

RankMetrics compute_metrics(int rank, int k) {
  if (rank < 1) throw ContractError("compute_metrics: rank must be >= 1");
  RankMetrics m;
  m.rr = 1.0 / rank;
  if (rank <= k) {
    m.hr = 1.0;
    m.ndcg = 1.0 / std::log2(static_cast<double>(rank) + 1.0);
  }
  return m;
}

MetricsReport evaluate_model(const Scorer& scorer, const DatasetSplit& split, const EvalProtocol& protocol,
                             EvalTarget target, std::string model) {
  MetricsReport report;
  report.model = std::move(model);
  report.cutoff = protocol.cutoff;
  for (const auto& row : split.rows) {
    Sequence seen = row.full();
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    Rng rng(derive_seed(protocol.seed, row.user));
    const ItemId positive = target == EvalTarget::test ? row.test_target : row.valid_target;
    const Sequence prefix = target == EvalTarget::test ? row.test_prefix() : row.valid_prefix();

    std::vector<ItemId> candidates{positive};
    const auto negatives = sample_negatives(split.num_items(), seen, protocol.negatives, rng);
    candidates.insert(candidates.end(), negatives.begin(), negatives.end());
    const auto scores = scorer(prefix, candidates);
    if (scores.size() != candidates.size()) throw ContractError("scorer returned the wrong number of scores");

    UserMetrics um;
    um.user = row.user;
    um.target = positive;
    um.rank = rank_of_positive(scores[0], std::span<const double>(scores).subspan(1));
    um.metrics = compute_metrics(um.rank, protocol.cutoff);
    report.ndcg += um.metrics.ndcg;
    report.hr += um.metrics.hr;
    report.mrr += um.metrics.rr;
    report.per_user.push_back(um);
  }
  report.users = report.per_user.size();
  if (report.users) {
    const auto n = static_cast<double>(report.users);
    report.ndcg /= n;
    report.hr /= n;
    report.mrr /= n;
  }
  return report;
}

Scorer generator_scorer(const GeneratorParams& gen) {
  return [&gen](std::span<const ItemId> prefix, std::span<const ItemId> candidates) {
    const Sequence window = window_pad(strip_padding(prefix), gen.config.attention.window);
    const Tensor logits = forward_all_positions(gen, window);
    const auto last = logits.row(logits.rows() - 1);
    std::vector<double> out;
    out.reserve(candidates.size());
    for (ItemId id : candidates) out.push_back(static_cast<double>(last[static_cast<std::size_t>(id - 1)]));
    return out;
  };
}

Scorer poprec_baseline(const DatasetSplit& split) {
  auto counts = train_item_counts(split);
  return [counts = std::move(counts)](std::span<const ItemId>, std::span<const ItemId> candidates) {
    std::vector<double> out;
    out.reserve(candidates.size());
    for (ItemId id : candidates) out.push_back(static_cast<double>(counts.at(static_cast<std::size_t>(id))));
    return out;
  };
}

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_report_kv(std::ostream& out, std::span<const MetricsReport> reports) {
  for (const auto& r : reports) {
    out << "model=" << r.model << " users=" << r.users << " cutoff=" << r.cutoff << " ndcg=" << fmt(r.ndcg)
        << " hr=" << fmt(r.hr) << " mrr=" << fmt(r.mrr) << '\n';
  }
}

std::vector<MetricsReport> parse_report_kv(std::istream& in) {
  std::vector<MetricsReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    MetricsReport r;
    std::istringstream fields(line);
    std::string kv;
    int seen = 0;
    while (fields >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw DataError("metrics line: expected key=value, got '" + kv + "'");
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      ++seen;
      if (key == "model") r.model = value;
      else if (key == "users") r.users = std::stoull(value);
      else if (key == "cutoff") r.cutoff = std::stoi(value);
      else if (key == "ndcg") r.ndcg = std::stod(value);
      else if (key == "hr") r.hr = std::stod(value);
      else if (key == "mrr") r.mrr = std::stod(value);
      else throw DataError("metrics line: unknown key '" + key + "'");
    }
    if (seen != 6) throw DataError("metrics line: expected 6 fields");
    out.push_back(std::move(r));
  }
  return out;
}

void write_report_table(std::ostream& out, std::span<const MetricsReport> reports) {
  char buf[160];
  const int k = reports.empty() ? 10 : reports.front().cutoff;
  std::snprintf(buf, sizeof buf, "%-16s %8s %10s %10s %10s\n", "model", "users", ("NDCG@" + std::to_string(k)).c_str(),
                ("HR@" + std::to_string(k)).c_str(), "MRR");
  out << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-16s %8zu %10.4f %10.4f %10.4f\n", r.model.c_str(), r.users, r.ndcg, r.hr, r.mrr);
    out << buf;
  }
}

void write_per_user(std::ostream& out, const MetricsReport& report) {
  out << "user_index\ttarget\trank\tndcg\thr\trr\n";
  for (const auto& u : report.per_user) {
    out << u.user << '\t' << u.target << '\t' << u.rank << '\t' << fmt(u.metrics.ndcg) << '\t' << fmt(u.metrics.hr)
        << '\t' << fmt(u.metrics.rr) << '\n';
  }
}

}  // namespace mfgan
