#include "mfgan/data_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mfgan/errors.hpp"
#include "mfgan/rng.hpp"

namespace mfgan {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool parse_int64(const std::string& text, std::int64_t& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  in >> out;
  return !in.fail() && in.peek() == std::char_traits<char>::eof() && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

}  // namespace

// ---- ingestion ------------------------------------------------------------

std::vector<InteractionRecord> parse_interactions(std::istream& in, const std::string& source, IngestReport* report) {
  std::vector<InteractionRecord> records;
  IngestReport local;
  std::string line;
  std::size_t line_no = 0;
  std::size_t first_bad_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    ++local.lines;
    const auto fields = split_tabs(line);
    std::int64_t ts = 0;
    const bool ok = fields.size() == 3 && !fields[0].empty() && !fields[1].empty() && parse_int64(fields[2], ts);
    if (!ok) {
      if (local.lines == 1 && fields.size() == 3) {
        local.header_skipped = true;
        continue;
      }
      ++local.malformed;
      if (!first_bad_line) first_bad_line = line_no;
      continue;
    }
    records.push_back({fields[0], fields[1], ts});
  }
  const std::size_t data_lines = local.lines - (local.header_skipped ? 1 : 0);
  if (report) *report = local;
  if (data_lines > 0 && local.malformed * 100 > data_lines) {
    throw DataError(source + ": " + std::to_string(local.malformed) + " of " + std::to_string(data_lines) +
                    " lines are malformed (first at line " + std::to_string(first_bad_line) + ")");
  }
  return records;
}

std::vector<InteractionRecord> ingest_interactions(const std::filesystem::path& path, IngestReport* report) {
  auto in = open_in(path);
  return parse_interactions(in, path.string(), report);
}

void export_interactions(std::ostream& out, std::span<const InteractionRecord> records) {
  out << "user\titem\ttimestamp\n";
  for (const auto& r : records) out << r.user << '\t' << r.item << '\t' << r.timestamp << '\n';
}

std::vector<InteractionRecord> subsample_users(std::vector<InteractionRecord> records, std::size_t max_users,
                                               std::uint64_t seed) {
  if (max_users == 0) return records;
  std::vector<std::string> users;
  std::unordered_set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.user).second) users.push_back(r.user);
  if (users.size() <= max_users) return records;
  Rng rng(seed);
  for (std::size_t i = 0; i < max_users; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(users.size() - i));
    std::swap(users[i], users[j]);
  }
  std::unordered_set<std::string> keep(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(max_users));
  std::erase_if(records, [&](const InteractionRecord& r) { return !keep.count(r.user); });
  return records;
}

std::vector<InteractionRecord> k_core_filter(std::vector<InteractionRecord> records, int k) {
  if (k < 1) throw ContractError("k_core_filter: k must be >= 1");
  const auto threshold = static_cast<std::size_t>(k);
  while (true) {
    std::unordered_map<std::string, std::size_t> user_count, item_count;
    for (const auto& r : records) {
      ++user_count[r.user];
      ++item_count[r.item];
    }
    const auto before = records.size();
    std::erase_if(records, [&](const InteractionRecord& r) {
      return user_count[r.user] < threshold || item_count[r.item] < threshold;
    });
    if (records.size() == before) return records;
  }
}

std::vector<UserSequence> build_user_sequences(std::span<const InteractionRecord> records) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::pair<std::int64_t, std::string>>> by_user;
  for (const auto& r : records) {
    auto [it, inserted] = by_user.try_emplace(r.user);
    if (inserted) order.push_back(r.user);
    it->second.emplace_back(r.timestamp, r.item);
  }
  std::vector<UserSequence> out;
  out.reserve(order.size());
  for (const auto& user : order) {
    auto& events = by_user[user];
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    UserSequence seq{user, {}};
    seq.items.reserve(events.size());
    for (auto& e : events) seq.items.push_back(std::move(e.second));
    out.push_back(std::move(seq));
  }
  return out;
}

// ---- split ----------------------------------------------------------------

Sequence UserSplit::test_prefix() const {
  Sequence s = train;
  s.push_back(valid_target);
  return s;
}

Sequence UserSplit::full() const {
  Sequence s = test_prefix();
  s.push_back(test_target);
  return s;
}

std::size_t DatasetSplit::num_interactions() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.train.size() + 2;
  return n;
}

std::optional<ItemId> DatasetSplit::dense_id(const std::string& raw) const {
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i] == raw) return static_cast<ItemId>(i + 1);
  return std::nullopt;
}

DatasetSplit leave_one_out_split(std::span<const UserSequence> sequences) {
  DatasetSplit split;
  std::unordered_map<std::string, ItemId> dense;
  for (const auto& seq : sequences) {
    if (seq.items.size() < 3) {
      ++split.dropped_short;
      continue;
    }
    Sequence ids;
    ids.reserve(seq.items.size());
    for (const auto& raw : seq.items) {
      auto [it, inserted] = dense.try_emplace(raw, static_cast<ItemId>(split.items.size() + 1));
      if (inserted) split.items.push_back(raw);
      ids.push_back(it->second);
    }
    UserSplit row;
    row.user = split.users.size();
    row.test_target = ids.back();
    row.valid_target = ids[ids.size() - 2];
    row.train.assign(ids.begin(), ids.end() - 2);
    split.users.push_back(seq.user);
    split.rows.push_back(std::move(row));
  }
  return split;
}

// ---- factors --------------------------------------------------------------

BinSpec bin_factor_values(const std::string& factor, std::span<const double> values, int num_bins) {
  if (num_bins < 2) throw ConfigError("factor '" + factor + "': num_bins must be >= 2");
  BinSpec spec;
  spec.factor = factor;
  spec.kind = FactorKind::numeric;
  if (values.empty()) return spec;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  for (int k = 1; k < num_bins; ++k) {
    const std::size_t rank = static_cast<std::size_t>(k) * n / static_cast<std::size_t>(num_bins);
    if (rank == 0 || rank >= n) continue;
    const double cut = sorted[rank];
    if (cut <= sorted.front()) continue;  // would leave an empty first bin
    if (spec.boundaries.empty() || cut > spec.boundaries.back()) spec.boundaries.push_back(cut);
  }
  return spec;
}

BinSpec bin_categorical_values(const std::string& factor, std::span<const std::string> values) {
  BinSpec spec;
  spec.factor = factor;
  spec.kind = FactorKind::categorical;
  for (const auto& v : values)
    if (spec.bin_of(v) < 0) spec.categories.emplace_back(v, static_cast<int>(spec.categories.size()));
  return spec;
}

std::vector<std::size_t> train_item_counts(const DatasetSplit& split) {
  std::vector<std::size_t> counts(split.items.size() + 1, 0);
  for (const auto& row : split.rows)
    for (ItemId id : row.train) ++counts[static_cast<std::size_t>(id)];
  return counts;
}

FactorFile parse_factor_file(std::istream& in, const std::string& source) {
  FactorFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (file.columns.empty() && line_no == 1) {
      if (fields.size() < 2) throw DataError(source + ": header must name at least one factor column");
      file.columns.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != file.columns.size() + 1) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(file.columns.size() + 1) +
                      " fields, got " + std::to_string(fields.size()));
    }
    std::vector<std::optional<std::string>> cells;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c].empty() || fields[c] == "NA") cells.emplace_back(std::nullopt);
      else cells.emplace_back(fields[c]);
    }
    file.values[fields[0]] = std::move(cells);
  }
  if (file.columns.empty()) throw DataError(source + ": empty factor file");
  return file;
}

FactorFile read_factor_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_factor_file(in, path.string());
}

FactorBuild build_factor_tables(const DatasetSplit& split, std::span<const FactorSpec> specs, const FactorFile* file) {
  FactorBuild build;
  const auto counts = train_item_counts(split);
  const int num_items = split.num_items();

  for (const auto& spec : specs) {
    if (spec.kind == FactorKind::item_id) {
      build.tables.push_back(item_id_table(num_items, spec.name));
      continue;
    }
    // Per-item raw values; nullopt = missing.
    std::vector<std::optional<std::string>> raw(static_cast<std::size_t>(num_items) + 1);
    std::vector<std::optional<double>> numeric(static_cast<std::size_t>(num_items) + 1);
    std::ptrdiff_t column = -1;
    if (file) {
      auto it = std::find(file->columns.begin(), file->columns.end(), spec.name);
      if (it != file->columns.end()) column = it - file->columns.begin();
    }
    const bool computed_popularity = column < 0 && spec.kind == FactorKind::numeric && spec.name == "popularity";
    if (column < 0 && !computed_popularity) {
      throw DataError("factor '" + spec.name + "' is not a column of the factors file");
    }
    for (int id = 1; id <= num_items; ++id) {
      const auto u = static_cast<std::size_t>(id);
      if (computed_popularity) {
        numeric[u] = static_cast<double>(counts[u]);
        continue;
      }
      auto found = file->values.find(split.items[u - 1]);
      if (found == file->values.end()) continue;
      raw[u] = found->second[static_cast<std::size_t>(column)];
      if (spec.kind == FactorKind::numeric && raw[u]) {
        double v = 0;
        if (!parse_double(*raw[u], v)) {
          throw DataError("factor '" + spec.name + "': item " + split.items[u - 1] + " has non-numeric value '" +
                          *raw[u] + "'");
        }
        numeric[u] = v;
      }
    }

    BinSpec bins;
    if (spec.kind == FactorKind::numeric) {
      std::vector<double> visible;
      for (int id = 1; id <= num_items; ++id)
        if (counts[static_cast<std::size_t>(id)] > 0 && numeric[static_cast<std::size_t>(id)])
          visible.push_back(*numeric[static_cast<std::size_t>(id)]);
      bins = bin_factor_values(spec.name, visible, spec.num_bins);
      if (bins.num_bins() == 1) build.warnings.push_back("factor '" + spec.name + "' is constant: single bin");
    } else {
      std::vector<std::string> visible;
      for (int id = 1; id <= num_items; ++id)
        if (counts[static_cast<std::size_t>(id)] > 0 && raw[static_cast<std::size_t>(id)])
          visible.push_back(*raw[static_cast<std::size_t>(id)]);
      bins = bin_categorical_values(spec.name, visible);
    }

    FactorTable table;
    table.name = spec.name;
    table.kind = spec.kind;
    const std::int32_t unknown_row = bins.num_bins() + 1;
    table.table_rows = unknown_row + 1;
    table.row_of_item.assign(static_cast<std::size_t>(num_items) + 1, 0);
    for (int id = 1; id <= num_items; ++id) {
      const auto u = static_cast<std::size_t>(id);
      int bin = -1;
      if (spec.kind == FactorKind::numeric && numeric[u]) bin = bins.bin_of(*numeric[u]);
      if (spec.kind == FactorKind::categorical && raw[u]) bin = bins.bin_of(*raw[u]);
      table.row_of_item[u] = bin < 0 ? unknown_row : bin + 1;
    }
    build.bins.push_back(std::move(bins));
    build.tables.push_back(std::move(table));
  }
  return build;
}

// ---- manifest -------------------------------------------------------------

std::vector<std::string> manifest_files() {
  return {"catalog.tsv", "users.tsv", "train.tsv", "valid.tsv", "test.tsv", "bins.tsv", "item_factors.tsv", "stats.tsv"};
}

DatasetStats dataset_stats(const Manifest& manifest) {
  return DatasetStats{manifest.split.users.size(), manifest.split.items.size(), manifest.split.num_interactions(),
                      manifest.tables.size()};
}

namespace {

void write_ids(std::ostream& out, std::span<const ItemId> ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? " " : "") << ids[i];
}

Sequence parse_ids(const std::string& text, const std::string& where) {
  Sequence ids;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find(' ', start);
    if (end == std::string::npos) end = text.size();
    std::int64_t v = 0;
    if (!parse_int64(text.substr(start, end - start), v)) throw DataError(where + ": bad item id list");
    ids.push_back(static_cast<ItemId>(v));
    start = end + 1;
  }
  return ids;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, std::size_t fields) {
  auto in = open_in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (fields && f.size() != fields) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(fields) + " fields");
    }
    rows.push_back(std::move(f));
  }
  return rows;
}

std::size_t to_index(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  if (!parse_int64(s, v) || v < 0) throw DataError(where + ": bad index '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

void write_manifest(const Manifest& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "catalog.tsv");
    out << "item_id\titem\n";
    for (std::size_t i = 0; i < m.split.items.size(); ++i) out << i + 1 << '\t' << m.split.items[i] << '\n';
  }
  {
    auto out = open_out(dir / "users.tsv");
    out << "user_index\tuser\n";
    for (std::size_t i = 0; i < m.split.users.size(); ++i) out << i << '\t' << m.split.users[i] << '\n';
  }
  {
    auto out = open_out(dir / "train.tsv");
    out << "user_index\titems\n";
    for (const auto& row : m.split.rows) {
      out << row.user << '\t';
      write_ids(out, row.train);
      out << '\n';
    }
  }
  for (const char* name : {"valid.tsv", "test.tsv"}) {
    const bool valid = std::string(name) == "valid.tsv";
    auto out = open_out(dir / name);
    out << "user_index\tprefix\ttarget\n";
    for (const auto& row : m.split.rows) {
      out << row.user << '\t';
      write_ids(out, valid ? row.valid_prefix() : row.test_prefix());
      out << '\t' << (valid ? row.valid_target : row.test_target) << '\n';
    }
  }
  {
    auto out = open_out(dir / "bins.tsv");
    out << "record\tfactor\tvalue\tbin\n";
    for (const auto& b : m.bins) {
      out << "factor\t" << b.factor << '\t' << to_string(b.kind) << '\t' << b.num_bins() << '\n';
      for (double cut : b.boundaries) out << "boundary\t" << b.factor << '\t' << format_double(cut) << "\t-\n";
      for (const auto& [value, bin] : b.categories) out << "category\t" << b.factor << '\t' << value << '\t' << bin << '\n';
    }
  }
  {
    auto out = open_out(dir / "item_factors.tsv");
    out << "item_id";
    for (const auto& t : m.tables) out << '\t' << t.name << ':' << to_string(t.kind) << ':' << t.table_rows;
    out << '\n';
    for (int id = 1; id <= m.split.num_items(); ++id) {
      out << id;
      for (const auto& t : m.tables) out << '\t' << t.row(id);
      out << '\n';
    }
  }
  {
    const auto s = dataset_stats(m);
    auto out = open_out(dir / "stats.tsv");
    out << "statistic\tvalue\n";
    out << "users\t" << s.users << "\nitems\t" << s.items << "\ninteractions\t" << s.interactions << "\nfactors\t"
        << s.factors << "\ndropped_short\t" << m.split.dropped_short << '\n';
  }
}

Manifest read_manifest(const std::filesystem::path& dir) {
  Manifest m;
  for (const auto& f : manifest_files()) {
    if (!std::filesystem::exists(dir / f)) throw DataError("manifest " + dir.string() + " lacks " + f);
  }
  for (const auto& row : read_rows(dir / "catalog.tsv", 2)) {
    if (to_index(row[0], "catalog.tsv") != m.split.items.size() + 1) throw DataError("catalog.tsv: ids not contiguous");
    m.split.items.push_back(row[1]);
  }
  for (const auto& row : read_rows(dir / "users.tsv", 2)) m.split.users.push_back(row[1]);

  const auto train = read_rows(dir / "train.tsv", 2);
  const auto valid = read_rows(dir / "valid.tsv", 3);
  const auto test = read_rows(dir / "test.tsv", 3);
  if (train.size() != valid.size() || train.size() != test.size()) throw DataError("split files disagree on user count");
  const auto num_items = static_cast<ItemId>(m.split.items.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    UserSplit row;
    row.user = to_index(train[i][0], "train.tsv");
    if (row.user >= m.split.users.size()) throw DataError("train.tsv: unknown user index");
    row.train = parse_ids(train[i][1], "train.tsv");
    row.valid_target = static_cast<ItemId>(to_index(valid[i][2], "valid.tsv"));
    row.test_target = static_cast<ItemId>(to_index(test[i][2], "test.tsv"));
    for (ItemId id : row.full())
      if (id < 1 || id > num_items) throw DataError("manifest: item id out of catalog range");
    if (parse_ids(valid[i][1], "valid.tsv") != row.valid_prefix() || parse_ids(test[i][1], "test.tsv") != row.test_prefix()) {
      throw DataError("manifest: prefixes disagree with train.tsv for user " + std::to_string(row.user));
    }
    m.split.rows.push_back(std::move(row));
  }

  for (const auto& row : read_rows(dir / "bins.tsv", 4)) {
    if (row[0] == "factor") {
      BinSpec b;
      b.factor = row[1];
      b.kind = parse_factor_kind(row[2]);
      m.bins.push_back(std::move(b));
    } else if (m.bins.empty() || m.bins.back().factor != row[1]) {
      throw DataError("bins.tsv: record before its factor line");
    } else if (row[0] == "boundary") {
      double v = 0;
      if (!parse_double(row[2], v)) throw DataError("bins.tsv: bad boundary");
      m.bins.back().boundaries.push_back(v);
    } else if (row[0] == "category") {
      m.bins.back().categories.emplace_back(row[2], static_cast<int>(to_index(row[3], "bins.tsv")));
    } else {
      throw DataError("bins.tsv: unknown record '" + row[0] + "'");
    }
  }

  auto in = open_in(dir / "item_factors.tsv");
  std::string header;
  std::getline(in, header);
  strip_cr(header);
  auto columns = split_tabs(header);
  for (std::size_t c = 1; c < columns.size(); ++c) {
    const auto& spec = columns[c];
    const auto a = spec.find(':');
    const auto b = spec.rfind(':');
    if (a == std::string::npos || a == b) throw DataError("item_factors.tsv: bad column header '" + spec + "'");
    FactorTable t;
    t.name = spec.substr(0, a);
    t.kind = parse_factor_kind(spec.substr(a + 1, b - a - 1));
    t.table_rows = static_cast<std::int32_t>(to_index(spec.substr(b + 1), "item_factors.tsv"));
    t.row_of_item.assign(m.split.items.size() + 1, 0);
    m.tables.push_back(std::move(t));
  }
  std::string line;
  std::size_t expected = 1;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != m.tables.size() + 1 || to_index(f[0], "item_factors.tsv") != expected) {
      throw DataError("item_factors.tsv: malformed row for item " + std::to_string(expected));
    }
    for (std::size_t c = 0; c < m.tables.size(); ++c) {
      const auto r = static_cast<std::int32_t>(to_index(f[c + 1], "item_factors.tsv"));
      if (r < 1 || r >= m.tables[c].table_rows) throw DataError("item_factors.tsv: row outside table");
      m.tables[c].row_of_item[expected] = r;
    }
    ++expected;
  }
  if (expected != m.split.items.size() + 1) throw DataError("item_factors.tsv: item count differs from catalog");
  for (const auto& row : read_rows(dir / "stats.tsv", 2)) {
    if (row[0] == "dropped_short") m.split.dropped_short = to_index(row[1], "stats.tsv");
  }
  return m;
}

}  // namespace mfgan
