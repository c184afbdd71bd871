#include "mfgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mfgan/errors.hpp"

namespace mfgan {

Digest& Digest::add(std::string_view text) {
  add(static_cast<std::int64_t>(text.size()));
  for (unsigned char c : text) {
    hash_ ^= c;
    hash_ *= 0x100000001b3ULL;
  }
  return *this;
}

Digest& Digest::add(std::int64_t value) {
  auto v = static_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) {
    hash_ ^= (v >> (8 * i)) & 0xff;
    hash_ *= 0x100000001b3ULL;
  }
  return *this;
}

namespace {

template <class T>
const T& find_named(const std::vector<std::pair<std::string, T>>& items, const std::string& name, const char* kind) {
  for (const auto& [k, v] : items)
    if (k == name) return v;
  throw CheckpointError(std::string("checkpoint has no ") + kind + " '" + name + "'");
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void tensor(const std::string& name, const Tensor& t) {
    str(name);
    u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) u64(d);
    for (Real v : t.storage()) u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::pair<std::string, Tensor> tensor() {
    auto name = str();
    const auto rank = u32();
    if (rank < 1 || rank > 2) throw CheckpointError("tensor '" + name + "' has invalid rank");
    Shape shape;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto d = u64();
      if (d == 0 || d > (std::size_t{1} << 32)) throw CheckpointError("tensor '" + name + "' has invalid shape");
      shape.push_back(static_cast<std::size_t>(d));
      count *= static_cast<std::size_t>(d);
    }
    need(count * 4);
    std::vector<Real> values(count);
    for (auto& v : values) v = static_cast<Real>(std::bit_cast<float>(u32()));
    return {std::move(name), Tensor(std::move(shape), std::move(values))};
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor& CheckpointData::parameter(const std::string& name) const {
  return find_named(parameters, name, "parameter");
}
const Tensor& CheckpointData::optimizer_tensor(const std::string& name) const {
  return find_named(optimizer, name, "optimizer tensor");
}
std::int64_t CheckpointData::counter(const std::string& name) const { return find_named(counters, name, "counter"); }
double CheckpointData::scalar(const std::string& name) const { return find_named(scalars, name, "scalar"); }

std::string encode_checkpoint(const CheckpointData& data) {
  Writer w;
  for (char c : kCheckpointMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
  w.u64(data.config_digest);
  w.u32(static_cast<std::uint32_t>(data.parameters.size()));
  for (const auto& [name, t] : data.parameters) w.tensor(name, t);
  w.u32(static_cast<std::uint32_t>(data.optimizer.size()));
  for (const auto& [name, t] : data.optimizer) w.tensor(name, t);
  w.u32(static_cast<std::uint32_t>(data.counters.size()));
  for (const auto& [name, v] : data.counters) {
    w.str(name);
    w.u64(static_cast<std::uint64_t>(v));
  }
  w.u32(static_cast<std::uint32_t>(data.scalars.size()));
  for (const auto& [name, v] : data.scalars) {
    w.str(name);
    w.f64(v);
  }
  w.str(data.rng_state);
  return w.take();
}

CheckpointData decode_checkpoint(std::string_view bytes, std::optional<std::uint64_t> expected_digest) {
  Reader r(bytes);
  r.need(sizeof kCheckpointMagic);
  if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    throw CheckpointError("not a checkpoint (bad magic)");
  for (std::size_t i = 0; i < sizeof kCheckpointMagic; ++i) r.u8();
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  CheckpointData data;
  data.config_digest = r.u64();
  if (expected_digest && *expected_digest != data.config_digest)
    throw CheckpointError("checkpoint was written under a different model configuration (digest mismatch)");
  for (auto n = r.u32(); n > 0; --n) data.parameters.push_back(r.tensor());
  for (auto n = r.u32(); n > 0; --n) data.optimizer.push_back(r.tensor());
  for (auto n = r.u32(); n > 0; --n) {
    auto name = r.str();
    data.counters.emplace_back(std::move(name), static_cast<std::int64_t>(r.u64()));
  }
  for (auto n = r.u32(); n > 0; --n) {
    auto name = r.str();
    data.scalars.emplace_back(std::move(name), r.f64());
  }
  data.rng_state = r.str();
  if (!r.done()) throw CheckpointError("checkpoint has trailing bytes");
  return data;
}

void save_checkpoint(const CheckpointData& data, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(data);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData load_checkpoint(const std::filesystem::path& path, std::optional<std::uint64_t> expected_digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes, expected_digest);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

}  // namespace mfgan
