#include "fusion/model.hpp"

#include <cmath>

namespace fusion {

void validate(const ArchitectureConfig& cfg) {
  if (cfg.kernel < 1) throw ConfigError("kernel must be >= 1");
  if (cfg.pool < 1) throw ConfigError("pool must be >= 1");
  if (cfg.conv1_filters < 1 || cfg.conv2_filters < 1 || cfg.dense_units < 1) {
    throw ConfigError("filter and unit counts must be >= 1");
  }
  if (cfg.classes < 2) throw ConfigError("classes must be >= 2");
  // The shape chain itself checks the window length.
}

ShapeChain shape_chain(const ArchitectureConfig& cfg) {
  validate(cfg);
  ShapeChain s{};
  s.conv1_len = cfg.window_len - cfg.kernel + 1;
  s.pool1_len = s.conv1_len >= cfg.pool ? s.conv1_len / cfg.pool : 0;
  s.conv2_len = s.pool1_len - cfg.kernel + 1;
  s.pool2_len = s.conv2_len >= cfg.pool ? s.conv2_len / cfg.pool : 0;
  if (s.conv1_len < cfg.pool || s.conv2_len < cfg.pool || s.pool2_len < 1) {
    throw ConfigError("window_len " + std::to_string(cfg.window_len) +
                      " too short for two conv+pool stages");
  }
  s.flatten_per_branch = s.pool2_len * cfg.conv2_filters;
  s.concat = s.flatten_per_branch * kBranches;
  return s;
}

std::vector<LayerShape> layer_table(const ArchitectureConfig& cfg) {
  const ShapeChain s = shape_chain(cfg);
  std::vector<LayerShape> rows;
  for (const char* b : kBranchNames) {
    rows.push_back({std::string("input.") + b, {cfg.window_len, 1}});
  }
  for (const char* b : kBranchNames) {
    rows.push_back({std::string("conv1.") + b, {s.conv1_len, cfg.conv1_filters}});
    rows.push_back({std::string("pool1.") + b, {s.pool1_len, cfg.conv1_filters}});
  }
  for (const char* b : kBranchNames) {
    rows.push_back({std::string("conv2.") + b, {s.conv2_len, cfg.conv2_filters}});
    rows.push_back({std::string("pool2.") + b, {s.pool2_len, cfg.conv2_filters}});
  }
  for (const char* b : kBranchNames) {
    rows.push_back({std::string("flatten.") + b, {s.flatten_per_branch}});
  }
  rows.push_back({"concatenate", {s.concat}});
  rows.push_back({"dense", {cfg.dense_units}});
  rows.push_back({"output", {cfg.classes}});
  return rows;
}

std::vector<GroupSpec> group_specs(const ArchitectureConfig& cfg) {
  const ShapeChain s = shape_chain(cfg);
  const Index k = cfg.kernel;
  std::vector<GroupSpec> specs;
  specs.reserve(kGroupCount);
  for (int b = 0; b < kBranches; ++b) {
    const std::string prefix = std::string(kBranchNames[b]) + ".";
    specs.push_back({prefix + "conv1.kernel", GroupRole::ConvKernel, Layer::Conv1, b,
                     cfg.conv1_filters, k, k, cfg.conv1_filters * k});
    specs.push_back({prefix + "conv1.bias", GroupRole::ConvBias, Layer::Conv1, b,
                     cfg.conv1_filters, 1, 0, 0});
    specs.push_back({prefix + "conv2.kernel", GroupRole::ConvKernel, Layer::Conv2, b,
                     cfg.conv2_filters, cfg.conv1_filters * k, cfg.conv1_filters * k,
                     cfg.conv2_filters * k});
    specs.push_back({prefix + "conv2.bias", GroupRole::ConvBias, Layer::Conv2, b,
                     cfg.conv2_filters, 1, 0, 0});
  }
  specs.push_back({"dense.weight", GroupRole::DenseWeight, Layer::Dense, -1, cfg.dense_units,
                   s.concat, s.concat, cfg.dense_units});
  specs.push_back({"dense.bias", GroupRole::DenseBias, Layer::Dense, -1, cfg.dense_units, 1, 0,
                   0});
  specs.push_back({"output.weight", GroupRole::DenseWeight, Layer::Output, -1, cfg.classes,
                   cfg.dense_units, cfg.dense_units, cfg.classes});
  specs.push_back({"output.bias", GroupRole::DenseBias, Layer::Output, -1, cfg.classes, 1, 0,
                   0});
  return specs;
}

Index parameter_count(const ArchitectureConfig& cfg) {
  Index n = 0;
  for (const auto& g : group_specs(cfg)) n += g.rows * g.cols;
  return n;
}

template <typename Scalar>
FusionModel<Scalar>::FusionModel(ArchitectureConfig cfg, std::vector<ParamGroup<Scalar>> groups,
                                 Provenance provenance)
    : cfg_(cfg), chain_(shape_chain(cfg)), groups_(std::move(groups)), provenance_(provenance) {
  const auto specs = group_specs(cfg_);
  if (groups_.size() != specs.size()) {
    throw ShapeError("model has " + std::to_string(groups_.size()) + " parameter groups, expected " +
                     std::to_string(specs.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& v = groups_[i].value;
    if (v.rows() != specs[i].rows || v.cols() != specs[i].cols) {
      throw ShapeError("parameter group " + specs[i].name + " has shape " +
                       std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
    }
  }
}

template <typename Scalar>
void FusionModel<Scalar>::set_all_trainable(bool trainable) {
  for (auto& g : groups_) g.trainable = trainable;
}

template <typename Scalar>
bool FusionModel<Scalar>::any_trainable(Layer layer) const {
  for (const auto& g : groups_) {
    if (g.spec.layer == layer && g.trainable) return true;
  }
  return false;
}

template <typename Scalar>
Matrix<Scalar> glorot_uniform(const GroupSpec& spec, int group_index, std::uint64_t seed) {
  if (spec.fan_in + spec.fan_out == 0) return Matrix<Scalar>::Zero(spec.rows, spec.cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(spec.fan_in + spec.fan_out));
  const std::uint64_t stream = mix_seed(seed, static_cast<std::uint64_t>(group_index) + 1);
  // Counter-based: draw k belongs to row-major position k (the serialized
  // layout), so storage can be filled in its own order.
  Matrix<Scalar> w(spec.rows, spec.cols);
  Scalar* out = w.data();
  for (Index c = 0; c < spec.cols; ++c) {
    for (Index r = 0; r < spec.rows; ++r) {
      const auto k = static_cast<std::uint64_t>(r * spec.cols + c);
      const double u = static_cast<double>(mix_seed(stream, k) >> 11) * 0x1.0p-53;  // [0, 1)
      *out++ = static_cast<Scalar>(limit * (2.0 * u - 1.0));
    }
  }
  return w;
}

template <typename Scalar>
FusionModel<Scalar> build_model(const ArchitectureConfig& cfg, std::uint64_t seed) {
  const auto specs = group_specs(cfg);
  std::vector<ParamGroup<Scalar>> groups;
  groups.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    groups.push_back({specs[i], glorot_uniform<Scalar>(specs[i], static_cast<int>(i), seed), true});
  }
  return FusionModel<Scalar>(cfg, std::move(groups), Provenance::Fresh);
}

std::string to_string(GroupRole role) {
  switch (role) {
    case GroupRole::ConvKernel: return "conv_kernel";
    case GroupRole::ConvBias: return "conv_bias";
    case GroupRole::DenseWeight: return "dense_weight";
    case GroupRole::DenseBias: return "dense_bias";
  }
  return "?";
}

std::string to_string(Layer layer) {
  switch (layer) {
    case Layer::Conv1: return "conv1";
    case Layer::Conv2: return "conv2";
    case Layer::Dense: return "dense";
    case Layer::Output: return "output";
  }
  return "?";
}

template class FusionModel<float>;
template class FusionModel<double>;
template Matrix<float> glorot_uniform<float>(const GroupSpec&, int, std::uint64_t);
template Matrix<double> glorot_uniform<double>(const GroupSpec&, int, std::uint64_t);
template FusionModel<float> build_model<float>(const ArchitectureConfig&, std::uint64_t);
template FusionModel<double> build_model<double>(const ArchitectureConfig&, std::uint64_t);

}  // namespace fusion
