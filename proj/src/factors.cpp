#include "mfgan/factors.hpp"

#include <algorithm>

#include "mfgan/errors.hpp"

namespace mfgan {

const char* to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::categorical: return "categorical";
    case FactorKind::numeric: return "numeric";
    case FactorKind::item_id: return "item-id";
  }
  return "?";
}

FactorKind parse_factor_kind(const std::string& text) {
  if (text == "categorical") return FactorKind::categorical;
  if (text == "numeric") return FactorKind::numeric;
  if (text == "item-id" || text == "item_id") return FactorKind::item_id;
  throw ConfigError("unknown factor kind '" + text + "' (expected categorical, numeric or item-id)");
}

int BinSpec::num_bins() const {
  if (kind == FactorKind::numeric) return static_cast<int>(boundaries.size()) + 1;
  return static_cast<int>(categories.size());
}

int BinSpec::bin_of(double value) const {
  return static_cast<int>(std::upper_bound(boundaries.begin(), boundaries.end(), value) - boundaries.begin());
}

int BinSpec::bin_of(const std::string& value) const {
  for (const auto& [name, bin] : categories)
    if (name == value) return bin;
  return -1;
}

std::int32_t FactorTable::row(ItemId item) const {
  if (item < 0 || static_cast<std::size_t>(item) >= row_of_item.size()) {
    throw DataError("factor '" + name + "' has no entry for item " + std::to_string(item));
  }
  return row_of_item[static_cast<std::size_t>(item)];
}

FactorTable item_id_table(int num_items, std::string name) {
  FactorTable t;
  t.name = std::move(name);
  t.kind = FactorKind::item_id;
  t.row_of_item.resize(static_cast<std::size_t>(num_items) + 1);
  for (int i = 0; i <= num_items; ++i) t.row_of_item[static_cast<std::size_t>(i)] = i;
  t.table_rows = num_items + 1;
  return t;
}

}  // namespace mfgan
