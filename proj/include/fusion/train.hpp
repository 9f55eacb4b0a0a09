#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fusion/data.hpp"
#include "fusion/json_io.hpp"
#include "fusion/metrics.hpp"
#include "fusion/model.hpp"
#include "fusion/optim.hpp"

namespace fusion {

struct Hyperparams {
  double learning_rate = 0.001;
  Index batch_size = 32;
  int epochs = 50;
  L2Config l2{0.01};
  std::uint64_t seed = 42;
};

void validate(const Hyperparams& hp);

/// Baseline defaults with the fine-tuning learning rate.
Hyperparams fine_tune_defaults();

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // sample-weighted mean of per-batch objective
  double train_acc = 0.0;
  double val_loss = 0.0;    // objective on the validation set after the epoch
  double val_acc = 0.0;
  bool has_validation = false;
  double l2_penalty = 0.0;  // after the epoch's last step
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  Index trainable_params = 0;
  double total_seconds = 0.0;
};

std::string history_csv(const TrainHistory& h);
void to_json(Json& j, const TrainHistory& h);

/// Visit order for an epoch: indices shuffled with a seed mixed from
/// (seed, epoch) by SplitMix64.
std::vector<std::size_t> epoch_order(std::span<const std::size_t> indices, std::uint64_t seed,
                                     int epoch);

/// Called after every epoch; returning false ends training early.
using EpochCallback = std::function<bool(const EpochRecord&)>;

/// Mini-batch Adam on mean cross-entropy + L2. The last short batch is kept.
/// Mutates `model` in place; frozen groups are never written. Throws
/// NumericError on a non-finite objective.
TrainHistory train(FusionModel<float>& model, const WindowSet& data,
                   std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                   const Hyperparams& hp, const EpochCallback& on_epoch = {});

struct Predictions {
  Matrix<double> probs;  // one row per window
  std::vector<Index> predicted;
  std::vector<Index> labels;
};

Predictions predict(const FusionModel<float>& model, const WindowSet& data,
                    std::span<const std::size_t> idx, Index batch_size = 32);

struct SetObjective {
  double data_loss = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  double accuracy = 0.0;
};

/// Mean cross-entropy over a set plus the L2 penalty, assembled in double.
SetObjective objective_on(const FusionModel<float>& model, const WindowSet& data,
                          std::span<const std::size_t> idx, const L2Config& l2,
                          Index batch_size = 32);

/// Forward every window, argmax (ties to the lowest class) and build the
/// metrics report. Throws DataError on an empty set.
MetricsReport evaluate(const FusionModel<float>& model, const WindowSet& data,
                       std::span<const std::size_t> idx);

struct CrossValResult {
  std::vector<TrainHistory> histories;
  std::vector<double> final_val_accuracy;
  double mean_val_accuracy = 0.0;
  double std_val_accuracy = 0.0;  // sample standard deviation
};

using ModelBuilder = std::function<FusionModel<float>()>;

/// k stratified folds over `partition`; a fresh model from `build` per fold.
CrossValResult crossval(const ModelBuilder& build, const WindowSet& data,
                        std::span<const std::size_t> partition, int k, const Hyperparams& hp);

}  // namespace fusion
