#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fusion/json_io.hpp"

namespace fusion::cli {

/// Every knob of one run. JSON keys equal the long flag names, so an archived
/// config.json can be replayed with `--config`.
struct ExperimentConfig {
  std::string command;
  std::vector<std::string> data;  // manifest.json, a directory holding one, or recording files
  bool synth = false;             // generate the dataset in memory instead of loading
  double rpm = 1500.0;
  double torque = 0.7;
  double force = 1000.0;
  std::string condition;          // empty: derived from rpm/torque/force
  int per_class = 4;
  double duration = 4.0;
  double sample_rate = 64000.0;
  std::uint64_t synth_seed = 1;

  std::int64_t window = 10000;
  std::int64_t stride = 5000;
  double test_frac = 0.2;
  double val_frac = 0.0;
  std::string split_mode = "window";
  std::string standardize = "train";
  std::uint64_t seed = 42;

  int epochs = 50;
  std::int64_t batch_size = 32;
  double lr = 0.001;
  double l2 = 0.01;

  std::string strategy;
  std::string checkpoint;
  std::uint64_t reinit_seed = 7;
  int folds = 5;

  std::string input;
  std::string formats = "json,csv,svg";
  std::string out;
  bool quiet = false;

  bool operator==(const ExperimentConfig&) const = default;
};

void to_json(Json& j, const ExperimentConfig& c);
void from_json(const Json& j, ExperimentConfig& c);

/// "N15_M07_F10" style name for an operating point.
std::string condition_name(double rpm, double torque, double force);

/// Environment variable that supplies the output directory when --out is absent.
inline constexpr const char* kOutDirEnv = "FUSION_OUT_DIR";

/// Parses and executes one subcommand. Returns 0 on success. Failures print
/// "error: <category>: <message>" on one line to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code for an error category.
int exit_code(const std::string& category);

}  // namespace fusion::cli
