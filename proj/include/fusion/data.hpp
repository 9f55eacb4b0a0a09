#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusion/tensor.hpp"

namespace fusion {

enum class FaultClass : int { Healthy = 0, InnerFault = 1, OuterFault = 2 };
inline constexpr int kClassCount = 3;

std::string to_string(FaultClass c);
/// Throws DataError for anything outside {Healthy, InnerFault, OuterFault}.
FaultClass parse_fault_class(const std::string& name);
std::vector<std::string> class_names();

struct OperatingCondition {
  double rotational_speed = 1500.0;  // rpm
  double load_torque = 0.7;          // Nm
  double radial_force = 1000.0;      // N
  std::string name = "N15_M07_F10";

  bool operator==(const OperatingCondition&) const = default;
};

void validate(const OperatingCondition& oc);

/// A labeled 3-channel signal. `samples` is length x 3 with columns
/// phase_current_1, phase_current_2, vibration.
struct Recording {
  std::string id;
  Eigen::MatrixXf samples;
  double sample_rate = 64000.0;
  FaultClass label = FaultClass::Healthy;
  OperatingCondition condition;
};

void validate(const Recording& rec);

struct Window {
  Eigen::MatrixXf data;  // window_len x 3
  FaultClass label;
  std::string recording_id;
  Index start;
};

struct WindowSet {
  std::vector<Window> windows;
  Index window_len = 0;
  Index stride = 0;

  std::size_t size() const { return windows.size(); }
  std::array<Index, kClassCount> class_counts() const;
  void append(WindowSet other);
};

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

inline constexpr double kStdFloor = 1e-12;

struct ChannelStats {
  double mean = 0.0;
  double std = 1.0;  // population form
};

/// Mean and population standard deviation. Throws DataError on empty input.
ChannelStats standardize_fit(std::span<const double> x);
/// (x - mean) / std, or all zeros when std < kStdFloor.
std::vector<double> standardize_apply(std::span<const double> x, const ChannelStats& stats);

/// Per-channel statistics for the three channels.
struct Standardizer {
  std::array<ChannelStats, 3> channels;
};

/// Fits each channel over the samples of the given windows (overlapping
/// samples count once per window they appear in).
Standardizer fit_standardizer(const WindowSet& ws, std::span<const std::size_t> indices);
void apply_standardizer(const Standardizer& s, WindowSet& ws);
/// Fits and applies per recording, before segmentation.
void standardize_recording(Recording& rec);

// ---------------------------------------------------------------------------
// Segmentation
// ---------------------------------------------------------------------------

/// floor((length - window_len) / stride) + 1, or 0 when length < window_len.
Index window_count(Index length, Index window_len, Index stride);

/// Overlapping windows at offsets 0, stride, 2*stride, ...; the partial tail is
/// discarded. Throws DataError when the recording is shorter than one window.
WindowSet segment(const Recording& rec, Index window_len = 10000, Index stride = 5000);

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

enum class SplitMode { WindowLevel, RecordingLevel };
std::string to_string(SplitMode m);
SplitMode parse_split_mode(const std::string& name);

struct SplitPlan {
  std::vector<double> ratios;  // train, [validation,] test
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::WindowLevel;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Largest-remainder allocation of `total` across classes in proportion to
/// `counts`; ties in the remainder go to the lower class index.
std::vector<Index> largest_remainder(std::span<const Index> counts, Index total);

/// Stratified train/test split. Test size is round(N * test_fraction),
/// allocated per class by largest remainder. Recording-level mode moves whole
/// recordings, so per-class counts approximate the allocation.
SplitPlan split_stratified(const WindowSet& ws, double test_fraction, std::uint64_t seed,
                           SplitMode mode = SplitMode::WindowLevel);

/// Test first, then validation out of the remainder.
SplitPlan split_three_way(const WindowSet& ws, double validation_fraction, double test_fraction,
                          std::uint64_t seed, SplitMode mode = SplitMode::WindowLevel);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Stratified k folds over `partition` (indices into ws).
std::vector<Fold> kfold(const WindowSet& ws, std::span<const std::size_t> partition, int k,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// End-to-end preparation: segment, split, standardize
// ---------------------------------------------------------------------------

enum class StandardizeScope { TrainPartition, PerRecording };
std::string to_string(StandardizeScope s);
StandardizeScope parse_standardize_scope(const std::string& name);

struct PipelineConfig {
  Index window_len = 10000;
  Index stride = 5000;
  double validation_fraction = 0.0;  // 0: train/test only
  double test_fraction = 0.2;
  bool all_test = false;             // no split: every window is a test window
  std::uint64_t seed = 42;
  SplitMode mode = SplitMode::WindowLevel;
  StandardizeScope scope = StandardizeScope::TrainPartition;
};

struct PreparedData {
  WindowSet windows;
  SplitPlan plan;
  std::optional<Standardizer> standardizer;  // set for TrainPartition scope
};

/// Segments every recording, splits, then standardizes. With TrainPartition
/// scope the statistics are fitted on the training partition, or taken from
/// `fixed` when given (e.g. a source model's statistics).
PreparedData prepare(std::vector<Recording> recordings, const PipelineConfig& cfg,
                     const Standardizer* fixed = nullptr);

// ---------------------------------------------------------------------------
// Interchange format
// ---------------------------------------------------------------------------

/// Binary file: one canonical JSON header line, then channel-major f32 LE
/// samples. Files ending in ".csv" use the CSV fallback: three columns with a
/// header row plus a sidecar "<stem>.json" holding the metadata.
Recording load_recording(const std::filesystem::path& path);
void save_recording(const Recording& rec, const std::filesystem::path& path);
void save_recording_csv(const Recording& rec, const std::filesystem::path& path);

/// Order-sensitive FNV-1a hash of ids, labels and sample bytes.
std::string fingerprint(const std::vector<Recording>& recordings);

}  // namespace fusion
