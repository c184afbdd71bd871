#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfgan/tensor.hpp"

namespace mfgan {

inline constexpr char kCheckpointMagic[8] = {'M', 'F', 'G', 'A', 'N', 'C', 'K', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Incremental 64-bit FNV-1a.
class Digest {
 public:
  Digest& add(std::string_view text);
  Digest& add(std::int64_t value);
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

/// Checkpoint contents. Tensors are stored as little-endian 32-bit floats.
struct CheckpointData {
  std::uint64_t config_digest = 0;
  std::vector<std::pair<std::string, Tensor>> parameters;
  std::vector<std::pair<std::string, Tensor>> optimizer;
  std::vector<std::pair<std::string, std::int64_t>> counters;
  std::vector<std::pair<std::string, double>> scalars;
  std::string rng_state;

  const Tensor& parameter(const std::string& name) const;
  const Tensor& optimizer_tensor(const std::string& name) const;
  std::int64_t counter(const std::string& name) const;
  double scalar(const std::string& name) const;

  friend bool operator==(const CheckpointData&, const CheckpointData&) = default;
};

std::string encode_checkpoint(const CheckpointData& data);
/// Rejects bad magic, version or (when given) digest before decoding any
/// tensor, and truncated or trailing bytes.
CheckpointData decode_checkpoint(std::string_view bytes, std::optional<std::uint64_t> expected_digest = std::nullopt);

/// Written to a temporary file and renamed into place.
void save_checkpoint(const CheckpointData& data, const std::filesystem::path& path);
CheckpointData load_checkpoint(const std::filesystem::path& path,
                               std::optional<std::uint64_t> expected_digest = std::nullopt);

}  // namespace mfgan
