#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfgan/sequence.hpp"

namespace mfgan {

enum class FactorKind { categorical, numeric, item_id };

const char* to_string(FactorKind kind);
FactorKind parse_factor_kind(const std::string& text);

/// One kind of item context carried by a dedicated discriminator.
struct FactorSpec {
  std::string name;
  FactorKind kind = FactorKind::categorical;
  int num_bins = 50;  ///< numeric only, >= 2
};

/// Discretization of one factor. Bins are 0-based here; FactorTable shifts
/// them by one to reserve row 0 for padding.
struct BinSpec {
  std::string factor;
  FactorKind kind = FactorKind::numeric;
  std::vector<double> boundaries;                         ///< numeric: strictly increasing cut points
  std::vector<std::pair<std::string, int>> categories;   ///< categorical: value -> bin, first-appearance order

  int num_bins() const;
  /// Bin of a numeric value: number of boundaries <= value.
  int bin_of(double value) const;
  /// Bin of a categorical value, or -1 when unseen.
  int bin_of(const std::string& value) const;

  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

/// Item id -> embedding row for one factor. Row 0 is padding, rows
/// 1..num_bins are the bins, and (for binned kinds) row num_bins+1 collects
/// items whose value is missing or unseen.
struct FactorTable {
  std::string name;
  FactorKind kind = FactorKind::item_id;
  std::vector<std::int32_t> row_of_item;  ///< indexed by item id, entry 0 = 0
  std::int32_t table_rows = 1;            ///< rows in the embedding table, including padding

  std::int32_t row(ItemId item) const;
  std::size_t num_items() const { return row_of_item.empty() ? 0 : row_of_item.size() - 1; }

  friend bool operator==(const FactorTable&, const FactorTable&) = default;
};

/// The identity table used by the item-id factor.
FactorTable item_id_table(int num_items, std::string name = "item");

}  // namespace mfgan
