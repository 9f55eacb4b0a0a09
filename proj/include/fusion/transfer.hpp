#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fusion/checkpoint.hpp"
#include "fusion/data.hpp"
#include "fusion/metrics.hpp"
#include "fusion/train.hpp"

namespace fusion {

/// Parameter-transfer variants.
///  - Model1: only dense and output trainable.
///  - Model2: conv1 (all branches) frozen, the rest trainable.
///  - Model3: like Model1, but dense and output are redrawn from a fresh seed.
enum class Strategy { Model1, Model2, Model3 };

std::string to_string(Strategy s);
/// Accepts "model1".."model3" (case-insensitive). Throws ConfigError otherwise.
Strategy parse_strategy(const std::string& name);

/// Sets trainable flags in place. Values are untouched.
void apply_freeze(FusionModel<float>& model, Strategy strategy);

/// Copies the checkpoint model, applies the freeze mask and, for Model3,
/// reinitializes dense and output with `reinit_seed`. Throws ConfigError when
/// `expected` is given and differs from the checkpoint's architecture.
FusionModel<float> apply_strategy(const Checkpoint& ckpt, Strategy strategy,
                                  std::uint64_t reinit_seed,
                                  const std::optional<ArchitectureConfig>& expected = std::nullopt);

struct FineTuneResult {
  TrainHistory history;
  MetricsReport report;
};

/// Trains on plan.train (validating on plan.validation) and evaluates on
/// plan.test. `model` is updated in place.
FineTuneResult fine_tune(FusionModel<float>& model, const WindowSet& data, const SplitPlan& plan,
                         const Hyperparams& hp);

/// Source model on target windows, no training.
MetricsReport cross_condition_eval(const Checkpoint& ckpt, const WindowSet& data,
                                   std::span<const std::size_t> idx, const std::string& source,
                                   const std::string& target);

/// Standardization statistics stored in / restored from checkpoint metadata.
void store_standardizer(const Standardizer& s, TrainingMetadata& meta);
std::optional<Standardizer> stored_standardizer(const TrainingMetadata& meta);

}  // namespace fusion
