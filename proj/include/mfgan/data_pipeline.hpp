#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfgan/factors.hpp"
#include "mfgan/sequence.hpp"

namespace mfgan {

struct InteractionRecord {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
  friend auto operator<=>(const InteractionRecord&, const InteractionRecord&) = default;
};

struct IngestReport {
  std::size_t lines = 0;  ///< non-empty lines seen, header included
  std::size_t malformed = 0;
  bool header_skipped = false;
};

/// Tab-separated user, item, timestamp. A first line whose timestamp field is
/// not an integer is treated as a header. More than 1% malformed lines is a
/// DataError; fewer are skipped and counted.
std::vector<InteractionRecord> parse_interactions(std::istream& in, const std::string& source,
                                                  IngestReport* report = nullptr);
std::vector<InteractionRecord> ingest_interactions(const std::filesystem::path& path, IngestReport* report = nullptr);
void export_interactions(std::ostream& out, std::span<const InteractionRecord> records);

/// Keeps `max_users` users chosen uniformly at random (seeded), before any
/// filtering. 0 keeps everyone.
std::vector<InteractionRecord> subsample_users(std::vector<InteractionRecord> records, std::size_t max_users,
                                               std::uint64_t seed);

/// Iterated pruning to the fixed point where every user and every item has at
/// least k interactions. Surviving records keep their input order.
std::vector<InteractionRecord> k_core_filter(std::vector<InteractionRecord> records, int k);

struct UserSequence {
  std::string user;
  std::vector<std::string> items;  ///< ascending timestamp, ties in input order
};

/// Users in order of first appearance; items sorted stably by timestamp.
std::vector<UserSequence> build_user_sequences(std::span<const InteractionRecord> records);

/// Leave-one-out partition of one user's dense sequence i_1..i_n.
struct UserSplit {
  std::size_t user = 0;  ///< index into DatasetSplit::users
  Sequence train;        ///< i_1..i_{n-2}
  ItemId valid_target = kPadItem;  ///< i_{n-1}, predicted from `train`
  ItemId test_target = kPadItem;   ///< i_n, predicted from train + valid_target

  Sequence valid_prefix() const { return train; }
  Sequence test_prefix() const;
  /// i_1..i_n
  Sequence full() const;

  friend bool operator==(const UserSplit&, const UserSplit&) = default;
};

struct DatasetSplit {
  std::vector<std::string> users;
  std::vector<std::string> items;  ///< items[id - 1] is the raw id of dense id `id`
  std::vector<UserSplit> rows;
  std::size_t dropped_short = 0;   ///< users with fewer than 3 interactions

  int num_items() const { return static_cast<int>(items.size()); }
  std::size_t num_interactions() const;
  /// Dense id for a raw item id, or nullopt.
  std::optional<ItemId> dense_id(const std::string& raw) const;

  friend bool operator==(const DatasetSplit& a, const DatasetSplit& b) {
    return a.users == b.users && a.items == b.items && a.rows == b.rows && a.dropped_short == b.dropped_short;
  }
};

/// Dense ids are assigned from 1 in order of first appearance over the
/// retained sequences; sequences shorter than 3 are dropped and counted.
DatasetSplit leave_one_out_split(std::span<const UserSequence> sequences);

/// Equal-frequency numeric binning. Cut point k is the value at rank
/// floor(k·N/num_bins) of the sorted values; duplicates are merged so the
/// boundaries stay strictly increasing. A constant factor yields one bin.
BinSpec bin_factor_values(const std::string& factor, std::span<const double> values, int num_bins);
/// Categorical binning: distinct values get bins in first-appearance order.
BinSpec bin_categorical_values(const std::string& factor, std::span<const std::string> values);

/// Per-item train-split interaction counts, indexed by dense id (entry 0 unused).
std::vector<std::size_t> train_item_counts(const DatasetSplit& split);

/// Item -> factor value columns read from a factors TSV (header names the
/// columns). Empty or "NA" cells are missing.
struct FactorFile {
  std::vector<std::string> columns;
  std::map<std::string, std::vector<std::optional<std::string>>> values;  ///< raw item -> one cell per column
};
FactorFile parse_factor_file(std::istream& in, const std::string& source);
FactorFile read_factor_file(const std::filesystem::path& path);

/// Builds bins (from train-visible items only) and the item -> row tables for
/// every factor. A numeric factor named "popularity" that is not a column of
/// `file` is computed from train_item_counts.
struct FactorBuild {
  std::vector<BinSpec> bins;  ///< one per binned factor (not for item-id)
  std::vector<FactorTable> tables;
  std::vector<std::string> warnings;
};
FactorBuild build_factor_tables(const DatasetSplit& split, std::span<const FactorSpec> specs, const FactorFile* file);

/// Everything `prep` writes and `train` reads.
struct Manifest {
  DatasetSplit split;
  std::vector<BinSpec> bins;
  std::vector<FactorTable> tables;
};

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  std::size_t factors = 0;
};
DatasetStats dataset_stats(const Manifest& manifest);

/// Writes catalog.tsv, users.tsv, train.tsv, valid.tsv, test.tsv, bins.tsv,
/// item_factors.tsv and stats.tsv into `dir`.
void write_manifest(const Manifest& manifest, const std::filesystem::path& dir);
Manifest read_manifest(const std::filesystem::path& dir);

/// File names write_manifest produces.
std::vector<std::string> manifest_files();

}  // namespace mfgan
