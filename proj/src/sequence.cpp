#include "mfgan/sequence.hpp"

#include <algorithm>

#include "mfgan/errors.hpp"

namespace mfgan {

Sequence window_pad(std::span<const ItemId> items, int n) {
  if (n < 1) throw ContractError("window_pad: n must be >= 1");
  const auto width = static_cast<std::size_t>(n);
  Sequence out(width, kPadItem);
  const std::size_t keep = std::min(items.size(), width);
  std::copy(items.end() - static_cast<std::ptrdiff_t>(keep), items.end(), out.end() - static_cast<std::ptrdiff_t>(keep));
  return out;
}

Sequence strip_padding(std::span<const ItemId> items) {
  auto first = std::find_if(items.begin(), items.end(), [](ItemId id) { return id != kPadItem; });
  Sequence out(first, items.end());
  if (std::find(out.begin(), out.end(), kPadItem) != out.end()) {
    throw DataError("sequence has padding after its first real item");
  }
  return out;
}

std::vector<char> padding_mask(std::span<const ItemId> window) {
  std::vector<char> mask(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) mask[i] = static_cast<char>(window[i] == kPadItem);
  return mask;
}

}  // namespace mfgan
