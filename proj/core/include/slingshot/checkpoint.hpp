#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "slingshot/features.hpp"
#include "slingshot/learners.hpp"

namespace slingshot {

inline constexpr int kCheckpointVersion = 1;

/// Serialized agent. `posterior_mean`/`posterior_variance` are empty for
/// Q-learning agents. The memory itself is not stored, only its length.
struct Checkpoint {
  int version = kCheckpointVersion;
  std::string algorithm;
  std::string extractor;
  std::string config_hash;
  WeightVector weights;
  WeightVector posterior_mean;
  WeightVector posterior_variance;
  std::uint64_t memory_length = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Hex FNV-1a of the extractor description and action count.
std::string extractor_config_hash(const FeatureExtractor& fx);

std::string checkpoint_to_text(const Checkpoint& cp);
Checkpoint checkpoint_from_text(const std::string& text);

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws InvalidArgument unless `cp` was produced for this algorithm and
/// extractor configuration.
void check_compatible(const Checkpoint& cp, std::string_view algorithm, const FeatureExtractor& fx);

}  // namespace slingshot
