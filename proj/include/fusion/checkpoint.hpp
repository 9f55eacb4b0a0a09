#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fusion/model.hpp"

namespace fusion {

inline constexpr char kCheckpointMagic[9] = "FFCKPT01";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// What produced a checkpoint. Wall-clock values are deliberately absent so
/// identical runs write identical bytes.
struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::int64_t epochs = 0;
  double learning_rate = 0.0;
  double l2_lambda = 0.0;
  std::string dataset_fingerprint;
  std::string condition;
  std::string strategy;  // empty for a baseline model
  // Per-channel standardization fitted on the training partition.
  std::vector<double> standardization_mean;
  std::vector<double> standardization_std;

  bool operator==(const TrainingMetadata&) const = default;
};

struct Checkpoint {
  TrainingMetadata metadata;
  FusionModel<float> model;
};

/// Layout: magic "FFCKPT01", u32 LE version, u32 LE header length, canonical
/// JSON header (config, metadata, parameter_count, groups), then every
/// parameter as f32 LE in declared group order, each group row-major.
void save_checkpoint(const FusionModel<float>& model, const TrainingMetadata& metadata,
                     const std::filesystem::path& path);

/// Throws IoError if the file cannot be opened and DataError on a bad magic,
/// version mismatch, malformed header or wrong payload length.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Header only, without reading parameters.
std::string read_checkpoint_header(const std::filesystem::path& path);

}  // namespace fusion
