#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mfgan {

/// Dense item id. 0 is the padding id; real items are 1..num_items.
using ItemId = std::int32_t;
inline constexpr ItemId kPadItem = 0;

using Sequence = std::vector<ItemId>;

/// Keeps the most recent min(len, n) items and left-pads with kPadItem to length n.
Sequence window_pad(std::span<const ItemId> items, int n);

/// Drops leading padding. Throws DataError if padding appears after a real item.
Sequence strip_padding(std::span<const ItemId> items);

/// Left-padding mask: 1 where the window holds kPadItem.
std::vector<char> padding_mask(std::span<const ItemId> window);

}  // namespace mfgan
