#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "mfgan/errors.hpp"
#include "mfgan/evaluation.hpp"

using namespace mfgan;

namespace {

/// Users with disjoint-ish histories over `items` items.
DatasetSplit toy_split(int users, int items, std::uint64_t seed) {
  Rng rng(seed);
  DatasetSplit split;
  for (int i = 1; i <= items; ++i) split.items.push_back("i" + std::to_string(i));
  for (int u = 0; u < users; ++u) {
    split.users.push_back("u" + std::to_string(u));
    UserSplit row;
    row.user = static_cast<std::size_t>(u);
    for (int k = 0; k < 5; ++k) row.train.push_back(static_cast<ItemId>(1 + rng.below(items)));
    row.valid_target = static_cast<ItemId>(1 + rng.below(items));
    row.test_target = static_cast<ItemId>(1 + rng.below(items));
    split.rows.push_back(row);
  }
  return split;
}

}  // namespace

TEST_CASE("metric hand values") {
  auto m = compute_metrics(1);
  CHECK(m.ndcg == 1.0);
  CHECK(m.hr == 1.0);
  CHECK(m.rr == 1.0);
  m = compute_metrics(3);
  CHECK(m.ndcg == 0.5);
  CHECK(m.hr == 1.0);
  m = compute_metrics(11);
  CHECK(m.ndcg == 0.0);
  CHECK(m.hr == 0.0);
  CHECK(m.rr == doctest::Approx(1.0 / 11));
  CHECK_THROWS_AS(compute_metrics(0), ContractError);
}

TEST_CASE("metrics are monotone in rank and hr bounds ndcg") {
  for (int r = 1; r < 120; ++r) {
    const auto a = compute_metrics(r), b = compute_metrics(r + 1);
    CHECK(a.ndcg >= b.ndcg);
    CHECK(a.hr >= b.hr);
    CHECK(a.rr > b.rr);
    CHECK(a.hr >= a.ndcg);
  }
}

TEST_CASE("pessimistic ranks") {
  CHECK(rank_of_positive(1.0, std::vector<double>{0.1, 0.2}) == 1);
  CHECK(rank_of_positive(0.5, std::vector<double>{0.9, 0.1}) == 2);
  CHECK(rank_of_positive(0.5, std::vector<double>{0.5, 0.5, 0.1, 0.5}) == 4);
  CHECK(rank_of_positive(0.0, std::vector<double>(100, 0.0)) == 101);
  CHECK_THROWS_AS(rank_of_positive(std::nan(""), std::vector<double>{0.1}), ContractError);
}

TEST_CASE("negative sampling") {
  std::vector<ItemId> seen;
  for (ItemId i = 1; i <= 50; ++i) seen.push_back(i * 4);
  std::sort(seen.begin(), seen.end());
  Rng rng(1);
  const auto neg = sample_negatives(200, seen, 100, rng);
  CHECK(neg.size() == 100);
  const std::set<ItemId> distinct(neg.begin(), neg.end());
  CHECK(distinct.size() == 100);
  for (ItemId i : neg) {
    CHECK(i >= 1);
    CHECK(i <= 200);
    CHECK(i % 4 != 0);
  }
  Rng a(9), b(9);
  CHECK(sample_negatives(200, seen, 100, a) == sample_negatives(200, seen, 100, b));

  std::vector<std::string> warnings;
  Rng c(2);
  CHECK(sample_negatives(60, seen, 100, c, &warnings).size() == 45);
  CHECK(warnings.size() == 1);
}

TEST_CASE("negative inclusion frequency") {
  std::vector<ItemId> seen;
  for (ItemId i = 151; i <= 200; ++i) seen.push_back(i);
  std::vector<int> hits(201, 0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(77, static_cast<std::uint64_t>(t)));
    for (ItemId i : sample_negatives(200, seen, 100, rng)) ++hits[static_cast<std::size_t>(i)];
  }
  const double p = 100.0 / 150.0;
  const double sigma = std::sqrt(trials * p * (1 - p));
  int outside = 0;
  for (ItemId i = 1; i <= 150; ++i) {
    if (std::abs(hits[static_cast<std::size_t>(i)] - trials * p) > 3 * sigma) ++outside;
  }
  CHECK(hits[151] == 0);
  // 150 marginals at 3σ: a handful of exceedances is expected by chance.
  CHECK(outside <= 5);
}

TEST_CASE("oracle and adversarial scorers") {
  const auto split = toy_split(30, 300, 3);
  const EvalProtocol protocol{.negatives = 100, .cutoff = 10, .seed = 4};
  const double inf = std::numeric_limits<double>::infinity();
  const Scorer oracle = [&](std::span<const ItemId> prefix, std::span<const ItemId> cand) {
    std::vector<double> s(cand.size(), 0.0);
    s[0] = inf;
    (void)prefix;
    return s;
  };
  auto r = evaluate_model(oracle, split, protocol);
  CHECK(r.users == 30);
  CHECK(r.ndcg == 1.0);
  CHECK(r.hr == 1.0);
  CHECK(r.mrr == 1.0);
  const Scorer adversarial = [&](std::span<const ItemId>, std::span<const ItemId> cand) {
    std::vector<double> s(cand.size(), 0.0);
    s[0] = -inf;
    return s;
  };
  r = evaluate_model(adversarial, split, protocol);
  CHECK(r.ndcg == 0.0);
  CHECK(r.hr == 0.0);
  CHECK(r.mrr == doctest::Approx(1.0 / 101));
}

TEST_CASE("random scorer calibration") {
  const auto split = toy_split(2000, 400, 5);
  Rng scores(6);
  const Scorer random = [&](std::span<const ItemId>, std::span<const ItemId> cand) {
    std::vector<double> s(cand.size());
    for (auto& v : s) v = scores.uniform();
    return s;
  };
  const auto r = evaluate_model(random, split, EvalProtocol{.seed = 7});
  const double p = 10.0 / 101.0;
  CHECK(std::abs(r.hr - p) < 3 * std::sqrt(p * (1 - p) / 2000));
  CHECK(r.hr >= r.ndcg);
}

TEST_CASE("popularity baseline") {
  auto split = toy_split(50, 40, 8);
  const auto counts = train_item_counts(split);
  std::vector<std::size_t> recount(41, 0);
  for (const auto& row : split.rows)
    for (ItemId i : row.train) ++recount[static_cast<std::size_t>(i)];
  CHECK(counts == recount);
  const auto scorer = poprec_baseline(split);
  const auto top = static_cast<ItemId>(std::max_element(recount.begin() + 1, recount.end()) - recount.begin());
  std::vector<ItemId> cand;
  for (ItemId i = 1; i <= 40 && cand.size() < 2; ++i)
    if (recount[static_cast<std::size_t>(i)] < recount[static_cast<std::size_t>(top)]) cand.push_back(i);
  cand.insert(cand.begin() + 1, top);
  const auto s = scorer(std::vector<ItemId>{1, 2}, cand);
  CHECK(rank_of_positive(s[1], std::vector<double>{s[0], s[2]}) == 1);
  CHECK(scorer(std::vector<ItemId>{5}, cand) == s);
}

TEST_CASE("evaluation is deterministic and reports round-trip") {
  const auto split = toy_split(40, 80, 9);
  const auto scorer = poprec_baseline(split);
  const auto a = evaluate_model(scorer, split, EvalProtocol{.seed = 1}, EvalTarget::test, "poprec");
  const auto b = evaluate_model(scorer, split, EvalProtocol{.seed = 1}, EvalTarget::test, "poprec");
  std::ostringstream sa, sb;
  std::vector<MetricsReport> ra{a}, rb{b};
  write_report_kv(sa, ra);
  write_report_kv(sb, rb);
  CHECK(sa.str() == sb.str());
  std::istringstream in(sa.str());
  const auto parsed = parse_report_kv(in);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].model == "poprec");
  CHECK(parsed[0].ndcg == a.ndcg);
  CHECK(parsed[0].hr == a.hr);
  CHECK(parsed[0].mrr == a.mrr);
  CHECK(parsed[0].users == a.users);
  std::ostringstream table, users;
  write_report_table(table, ra);
  write_per_user(users, a);
  CHECK(table.str().find("poprec") != std::string::npos);
  const std::string detail = users.str();
  CHECK(std::count(detail.begin(), detail.end(), '\n') == 41);
}
