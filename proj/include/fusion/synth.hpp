#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "fusion/data.hpp"

namespace fusion {

/// Parameters of one synthetic recording. Vibration is Gaussian noise plus,
/// for fault classes, exponentially decaying resonance bursts at the class's
/// defect frequency (rpm/60 * multiplier) scaled by radial_force/1000. The two
/// current channels are a supply sinusoid at rpm/60 * pole_pairs, amplitude
/// scaled by load_torque/0.7, amplitude-modulated at the defect frequency.
struct SynthSpec {
  std::string id = "synthetic";
  FaultClass label = FaultClass::Healthy;
  OperatingCondition condition;
  double duration_s = 4.0;
  double sample_rate = 64000.0;
  std::uint64_t seed = 0;

  double noise_std = 0.5;
  double inner_multiplier = 5.4;
  double outer_multiplier = 3.6;
  double resonance_hz = 2000.0;
  double decay_per_s = 800.0;
  double impulse_amplitude = 3.0;
  double timing_jitter = 0.02;  // fraction of the burst period

  int pole_pairs = 2;
  double current_amplitude = 1.0;
  double current_noise_std = 0.05;
  double inner_sideband_depth = 0.3;
  double outer_sideband_depth = 0.15;
  double phase_offset_rad = 2.0 * std::numbers::pi / 3.0;
};

void validate(const SynthSpec& spec);
Index sample_count(const SynthSpec& spec);
/// Bursts per second for the spec's class; 0 for Healthy.
double defect_frequency(const SynthSpec& spec);

/// The additive pieces of a recording, exposed so tests can check that only
/// the intended parts move when a condition changes.
struct SynthComponents {
  Eigen::MatrixXf noise;     // length x 3, one independent stream per channel
  Eigen::VectorXf impulses;  // vibration bursts only
  Eigen::MatrixXf currents;  // length x 2, noiseless
  std::vector<double> burst_times;
};

SynthComponents generate_components(const SynthSpec& spec);
Recording gen_recording(const SynthSpec& spec);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  std::string id;
  FaultClass label;
};

struct Manifest {
  OperatingCondition condition;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;
};

/// Recordings for `counts[i]` copies of `classes[i]`, each with its own
/// derived seed. `base` supplies every non-class, non-condition parameter.
std::vector<Recording> gen_recordings(const std::vector<FaultClass>& classes,
                                      const std::vector<int>& counts,
                                      const OperatingCondition& condition, std::uint64_t seed,
                                      const SynthSpec& base = {});

/// Writes one interchange file per recording plus `manifest.json` into `dir`.
Manifest gen_dataset(const std::vector<FaultClass>& classes, const std::vector<int>& counts,
                     const OperatingCondition& condition, std::uint64_t seed,
                     const std::filesystem::path& dir, const SynthSpec& base = {});

void save_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);
/// Loads every recording listed in a manifest, in manifest order.
std::vector<Recording> load_manifest_recordings(const std::filesystem::path& path);

}  // namespace fusion
