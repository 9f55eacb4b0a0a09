#include "fusion/transfer.hpp"

#include <algorithm>
#include <cctype>

namespace fusion {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Model1: return "model1";
    case Strategy::Model2: return "model2";
    case Strategy::Model3: return "model3";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "model1") return Strategy::Model1;
  if (lower == "model2") return Strategy::Model2;
  if (lower == "model3") return Strategy::Model3;
  throw ConfigError("unknown strategy '" + name + "' (expected model1, model2 or model3)");
}

void apply_freeze(FusionModel<float>& model, Strategy strategy) {
  for (auto& g : model.groups()) {
    switch (strategy) {
      case Strategy::Model1:
      case Strategy::Model3:
        g.trainable = g.spec.layer == Layer::Dense || g.spec.layer == Layer::Output;
        break;
      case Strategy::Model2:
        g.trainable = g.spec.layer != Layer::Conv1;
        break;
    }
  }
}

FusionModel<float> apply_strategy(const Checkpoint& ckpt, Strategy strategy,
                                  std::uint64_t reinit_seed,
                                  const std::optional<ArchitectureConfig>& expected) {
  if (expected && !(*expected == ckpt.model.config())) {
    throw ConfigError("checkpoint architecture does not match the target architecture");
  }
  FusionModel<float> model = ckpt.model;
  model.set_provenance(Provenance::Checkpoint);
  apply_freeze(model, strategy);
  if (strategy == Strategy::Model3) {
    for (int i : {kDenseWeight, kDenseBias, kOutputWeight, kOutputBias}) {
      auto& g = model.group(i);
      g.value = glorot_uniform<float>(g.spec, i, reinit_seed);
    }
  }
  return model;
}

FineTuneResult fine_tune(FusionModel<float>& model, const WindowSet& data, const SplitPlan& plan,
                         const Hyperparams& hp) {
  FineTuneResult out;
  out.history = train(model, data, plan.train, plan.validation, hp);
  out.report = evaluate(model, data, plan.test);
  out.report.wall_seconds += out.history.total_seconds;
  return out;
}

MetricsReport cross_condition_eval(const Checkpoint& ckpt, const WindowSet& data,
                                   std::span<const std::size_t> idx, const std::string& source,
                                   const std::string& target) {
  auto report = evaluate(ckpt.model, data, idx);
  report.source_condition = source;
  report.target_condition = target;
  return report;
}

void store_standardizer(const Standardizer& s, TrainingMetadata& meta) {
  meta.standardization_mean.clear();
  meta.standardization_std.clear();
  for (const auto& c : s.channels) {
    meta.standardization_mean.push_back(c.mean);
    meta.standardization_std.push_back(c.std);
  }
}

std::optional<Standardizer> stored_standardizer(const TrainingMetadata& meta) {
  if (meta.standardization_mean.empty()) return std::nullopt;
  if (meta.standardization_mean.size() != 3 || meta.standardization_std.size() != 3) {
    throw DataError("checkpoint standardization must hold 3 channels");
  }
  Standardizer s;
  for (std::size_t c = 0; c < 3; ++c) {
    s.channels[c] = {meta.standardization_mean[c], meta.standardization_std[c]};
  }
  return s;
}

}  // namespace fusion
