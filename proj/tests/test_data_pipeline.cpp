#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "mfgan/data_pipeline.hpp"
#include "mfgan/errors.hpp"
#include "mfgan/rng.hpp"

using namespace mfgan;

namespace {

std::vector<InteractionRecord> parse(const std::string& text, IngestReport* report = nullptr) {
  std::istringstream in(text);
  return parse_interactions(in, "mem", report);
}

/// Reference k-core: drop one offending record at a time until none is left.
std::multiset<InteractionRecord> slow_core(std::vector<InteractionRecord> records, std::size_t k) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::string, std::size_t> users, items;
    for (const auto& r : records) {
      ++users[r.user];
      ++items[r.item];
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (users[records[i].user] < k || items[records[i].item] < k) {
        records.erase(records.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return {records.begin(), records.end()};
}

std::vector<InteractionRecord> random_records(Rng& rng, int users, int items, int count) {
  std::vector<InteractionRecord> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({"u" + std::to_string(rng.below(static_cast<std::uint64_t>(users))),
                   "i" + std::to_string(rng.below(static_cast<std::uint64_t>(items))), static_cast<std::int64_t>(i)});
  }
  return out;
}

DatasetSplit toy_split() {
  std::vector<UserSequence> seqs{{"a", {"x", "y", "z", "w"}}, {"b", {"y", "q"}}, {"c", {"z", "x", "v"}}};
  return leave_one_out_split(seqs);
}

}  // namespace

TEST_CASE("ingestion") {
  IngestReport r;
  auto recs = parse("user\titem\ttime\nu1\ti1\t5\r\n\nu1\ti2\t3\n", &r);
  CHECK(r.header_skipped);
  CHECK(recs.size() == 2);
  CHECK(recs[1] == InteractionRecord{"u1", "i2", 3});
  recs = parse("u1\ti1\t5\n");
  CHECK(recs.size() == 1);

  std::string many;
  for (int i = 0; i < 200; ++i) many += "u\ti\t" + std::to_string(i) + "\n";
  CHECK(parse(many + "bad line\n", &r).size() == 200);
  CHECK(r.malformed == 1);
  CHECK_THROWS_AS(parse(many + "bad\nbad\nbad\n"), DataError);

  std::ostringstream out;
  export_interactions(out, recs);
  CHECK(parse(out.str()) == recs);
}

TEST_CASE("subsampling") {
  Rng rng(1);
  const auto recs = random_records(rng, 50, 10, 400);
  const auto a = subsample_users(recs, 20, 7);
  std::set<std::string> users;
  for (const auto& r : a) users.insert(r.user);
  CHECK(users.size() == 20);
  CHECK(a == subsample_users(recs, 20, 7));
  CHECK(subsample_users(recs, 0, 7) == recs);
}

TEST_CASE("k-core on a toy graph") {
  // u3 has a single interaction; removing it drops i3 below 2, which then drops u2's i3
  const auto recs = parse("u1\ti1\t1\nu1\ti2\t2\nu2\ti1\t3\nu2\ti2\t4\nu2\ti3\t5\nu3\ti3\t6\n");
  const auto core = k_core_filter(recs, 2);
  CHECK(core.size() == 4);
  for (const auto& r : core) CHECK(r.item != "i3");
  CHECK(k_core_filter(core, 2) == core);
  CHECK(k_core_filter(recs, 1) == recs);
}

TEST_CASE("k-core matches a reference and is a fixed point") {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto recs = random_records(rng, 30, 25, 150 + static_cast<int>(rng.below(200)));
    for (int k : {2, 3, 5}) {
      const auto core = k_core_filter(recs, k);
      CHECK(std::multiset<InteractionRecord>(core.begin(), core.end()) == slow_core(recs, static_cast<std::size_t>(k)));
      CHECK(k_core_filter(core, k) == core);
      std::map<std::string, int> users, items;
      for (const auto& r : core) {
        ++users[r.user];
        ++items[r.item];
      }
      for (const auto& [u, c] : users) CHECK(c >= k);
      for (const auto& [i, c] : items) CHECK(c >= k);
    }
  }
}

TEST_CASE("user sequences") {
  const auto recs = parse("b\tx\t5\na\ty\t2\nb\tz\t1\nb\tw\t5\na\tv\t1\n");
  const auto seqs = build_user_sequences(recs);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].user == "b");
  CHECK(seqs[0].items == std::vector<std::string>{"z", "x", "w"});
  CHECK(seqs[1].items == std::vector<std::string>{"v", "y"});
}

TEST_CASE("leave-one-out split") {
  const auto split = toy_split();
  CHECK(split.dropped_short == 1);
  CHECK(split.users == std::vector<std::string>{"a", "c"});
  CHECK(split.items == std::vector<std::string>{"x", "y", "z", "w", "v"});
  REQUIRE(split.rows.size() == 2);
  CHECK(split.rows[0].train == Sequence{1, 2});
  CHECK(split.rows[0].valid_target == 3);
  CHECK(split.rows[0].test_target == 4);
  CHECK(split.rows[0].test_prefix() == Sequence{1, 2, 3});
  CHECK(split.rows[1].full() == Sequence{3, 1, 5});
  CHECK(split.num_interactions() == 7);
  CHECK(split.dense_id("v") == 5);
  CHECK(!split.dense_id("q"));
}

TEST_CASE("leave-one-out indices on random data") {
  Rng rng(3);
  const auto recs = random_records(rng, 40, 30, 500);
  const auto seqs = build_user_sequences(recs);
  const auto split = leave_one_out_split(seqs);
  std::size_t r = 0;
  for (const auto& s : seqs) {
    if (s.items.size() < 3) continue;
    const auto& row = split.rows[r++];
    const auto full = row.full();
    REQUIRE(full.size() == s.items.size());
    for (std::size_t t = 0; t < full.size(); ++t) CHECK(split.items[static_cast<std::size_t>(full[t] - 1)] == s.items[t]);
    CHECK(row.train.size() == s.items.size() - 2);
  }
  CHECK(r == split.rows.size());
}

TEST_CASE("equal frequency bins") {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(i);
  auto b = bin_factor_values("f", v, 4);
  CHECK(b.boundaries == std::vector<double>{25, 50, 75});
  CHECK(b.num_bins() == 4);
  CHECK(b.bin_of(0.0) == 0);
  CHECK(b.bin_of(25.0) == 1);
  CHECK(b.bin_of(99.0) == 3);
  b = bin_factor_values("f", std::vector<double>(10, 3.0), 5);
  CHECK(b.num_bins() == 1);
  b = bin_factor_values("f", std::vector<double>{1, 1, 1, 1, 2, 2, 3, 4}, 4);
  CHECK(b.boundaries == std::vector<double>{2, 3});
  CHECK_THROWS_AS(bin_factor_values("f", v, 1), ConfigError);
  const std::vector<std::string> cats{"b", "a", "b", "c"};
  const auto c = bin_categorical_values("g", cats);
  CHECK(c.bin_of(std::string("b")) == 0);
  CHECK(c.bin_of(std::string("c")) == 2);
  CHECK(c.bin_of(std::string("zz")) == -1);
}

TEST_CASE("factor tables and manifest round trip") {
  const auto split = toy_split();
  std::istringstream ff("item\tgenre\nx\tdrama\ny\tcomedy\nz\tdrama\nv\tNA\n");
  const auto file = parse_factor_file(ff, "mem");
  const std::vector<FactorSpec> specs{{"genre", FactorKind::categorical, 0},
                                      {"popularity", FactorKind::numeric, 2},
                                      {"item", FactorKind::item_id, 0}};
  const auto build = build_factor_tables(split, specs, &file);
  REQUIRE(build.tables.size() == 3);
  const auto& genre = build.tables[0];
  CHECK(genre.row(1) == genre.row(3));
  CHECK(genre.row(1) != genre.row(2));
  CHECK(genre.row(5) == genre.table_rows - 1);  // missing value row
  CHECK(genre.row(4) == genre.table_rows - 1);  // item absent from the file
  CHECK(build.tables[2].row(4) == 4);

  Manifest m{split, build.bins, build.tables};
  const auto dir = std::filesystem::temp_directory_path() / "mfgan_manifest_test";
  std::filesystem::remove_all(dir);
  write_manifest(m, dir);
  for (const auto& f : manifest_files()) CHECK(std::filesystem::exists(dir / f));
  const auto back = read_manifest(dir);
  CHECK(back.split == m.split);
  CHECK(back.bins == m.bins);
  CHECK(back.tables == m.tables);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(build_factor_tables(split, std::vector<FactorSpec>{{"price", FactorKind::numeric, 4}}, &file),
                  DataError);
}
