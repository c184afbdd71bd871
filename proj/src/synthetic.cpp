#include "mfgan/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mfgan/errors.hpp"
#include "mfgan/rng.hpp"

namespace mfgan {

namespace {

std::string label(char prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, value);
  return buf;
}

std::size_t draw(const std::vector<double>& weights, Rng& rng) {
  double total = 0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0) return i;
  }
  return weights.size() - 1;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticConfig& c) {
  if (c.items < 1 || c.users < 1 || c.categories < 1 || c.categories > c.items)
    throw ConfigError("synthetic: need items >= categories >= 1 and users >= 1");
  if (c.min_length < 3 || c.max_length < c.min_length) throw ConfigError("synthetic: need 3 <= min_length <= max_length");
  Rng rng(c.seed);
  SyntheticData data;

  // items are dealt to categories round-robin after a shuffle
  std::vector<int> order(static_cast<std::size_t>(c.items));
  for (int i = 0; i < c.items; ++i) order[static_cast<std::size_t>(i)] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(c.categories));
  std::vector<int> category_of(static_cast<std::size_t>(c.items));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int cat = static_cast<int>(k % static_cast<std::size_t>(c.categories));
    members[static_cast<std::size_t>(cat)].push_back(order[k]);
    category_of[static_cast<std::size_t>(order[k])] = cat;
  }
  for (int i = 0; i < c.items; ++i)
    data.item_category.emplace_back(label('i', i + 1, 3), label('c', category_of[static_cast<std::size_t>(i)] + 1, 2));

  // each category has one successor; other moves are uniform
  std::vector<int> successor(static_cast<std::size_t>(c.categories));
  for (int k = 0; k < c.categories; ++k) successor[static_cast<std::size_t>(k)] = (k + 1) % c.categories;
  std::vector<std::vector<double>> popularity(members.size());
  for (std::size_t k = 0; k < members.size(); ++k)
    for (std::size_t r = 0; r < members[k].size(); ++r) popularity[k].push_back(1.0 / static_cast<double>(r + 1));

  std::int64_t clock = 1000000;
  for (int u = 0; u < c.users; ++u) {
    const std::string user = label('u', u + 1, 4);
    const int length = c.min_length + static_cast<int>(rng.below(static_cast<std::uint64_t>(c.max_length - c.min_length + 1)));
    auto cat = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(c.categories)));
    for (int t = 0; t < length; ++t) {
      const int item = members[cat][draw(popularity[cat], rng)];
      data.interactions.push_back({user, label('i', item + 1, 3), clock++});
      cat = rng.uniform() < c.follow ? static_cast<std::size_t>(successor[cat])
                                     : static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(c.categories)));
    }
  }
  return data;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream inter(dir / "interactions.tsv", std::ios::binary);
  if (!inter) throw DataError("cannot write " + (dir / "interactions.tsv").string());
  export_interactions(inter, data.interactions);
  std::ofstream factors(dir / "factors.tsv", std::ios::binary);
  if (!factors) throw DataError("cannot write " + (dir / "factors.tsv").string());
  factors << "item\tcategory\n";
  for (const auto& [item, category] : data.item_category) factors << item << '\t' << category << '\n';
}

}  // namespace mfgan
