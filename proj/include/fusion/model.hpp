#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fusion/tensor.hpp"

namespace fusion {

inline constexpr int kBranches = 3;
inline constexpr std::array<const char*, kBranches> kBranchNames = {
    "phase_current_1", "phase_current_2", "vibration"};

/// Hyper-shape of the three-branch late-fusion network.
struct ArchitectureConfig {
  Index window_len = 10000;
  Index conv1_filters = 32;
  Index conv2_filters = 64;
  Index kernel = 3;
  Index pool = 2;
  Index dense_units = 100;
  Index classes = 3;

  bool operator==(const ArchitectureConfig&) const = default;
};

/// Per-branch sequence lengths through conv -> pool -> conv -> pool.
struct ShapeChain {
  Index conv1_len;
  Index pool1_len;
  Index conv2_len;
  Index pool2_len;
  Index flatten_per_branch;
  Index concat;
};

/// Throws ConfigError when the window is too short for two conv+pool stages
/// or the remaining fields are out of range.
ShapeChain shape_chain(const ArchitectureConfig& cfg);
void validate(const ArchitectureConfig& cfg);

/// One row of the layer table: layer name and output shape (length, channels)
/// or (units) for flat layers.
struct LayerShape {
  std::string name;
  std::vector<Index> shape;
};
std::vector<LayerShape> layer_table(const ArchitectureConfig& cfg);

enum class GroupRole { ConvKernel, ConvBias, DenseWeight, DenseBias };
enum class Layer { Conv1, Conv2, Dense, Output };

struct GroupSpec {
  std::string name;
  GroupRole role;
  Layer layer;
  int branch;  // -1 for the fused head
  Index rows;
  Index cols;
  Index fan_in;
  Index fan_out;
};

/// Parameter groups in declared (serialization) order: for each branch
/// conv1 kernel, conv1 bias, conv2 kernel, conv2 bias; then dense W, dense b,
/// output W, output b.
std::vector<GroupSpec> group_specs(const ArchitectureConfig& cfg);

/// Closed-form parameter total for a configuration.
Index parameter_count(const ArchitectureConfig& cfg);

inline constexpr int kGroupsPerBranch = 4;
inline constexpr int kDenseWeight = kBranches * kGroupsPerBranch;
inline constexpr int kDenseBias = kDenseWeight + 1;
inline constexpr int kOutputWeight = kDenseWeight + 2;
inline constexpr int kOutputBias = kDenseWeight + 3;
inline constexpr int kGroupCount = kDenseWeight + 4;

constexpr int conv_group(int branch, int stage, bool bias) {
  return branch * kGroupsPerBranch + (stage - 1) * 2 + (bias ? 1 : 0);
}

template <typename Scalar>
struct ParamGroup {
  GroupSpec spec;
  Matrix<Scalar> value;
  bool trainable = true;

  Index size() const { return value.size(); }
  bool is_bias() const {
    return spec.role == GroupRole::ConvBias || spec.role == GroupRole::DenseBias;
  }
};

enum class Provenance { Fresh, Checkpoint };

template <typename Scalar>
class FusionModel {
 public:
  using scalar_type = Scalar;

  FusionModel(ArchitectureConfig cfg, std::vector<ParamGroup<Scalar>> groups,
              Provenance provenance = Provenance::Fresh);

  const ArchitectureConfig& config() const { return cfg_; }
  const ShapeChain& shapes() const { return chain_; }
  Provenance provenance() const { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = p; }

  std::vector<ParamGroup<Scalar>>& groups() { return groups_; }
  const std::vector<ParamGroup<Scalar>>& groups() const { return groups_; }
  ParamGroup<Scalar>& group(int i) { return groups_.at(static_cast<std::size_t>(i)); }
  const ParamGroup<Scalar>& group(int i) const {
    return groups_.at(static_cast<std::size_t>(i));
  }

  const Matrix<Scalar>& value(int i) const { return group(i).value; }

  void set_all_trainable(bool trainable);
  bool any_trainable(Layer layer) const;

  template <typename Other>
  FusionModel<Other> cast() const {
    std::vector<ParamGroup<Other>> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) {
      out.push_back({g.spec, g.value.template cast<Other>(), g.trainable});
    }
    return FusionModel<Other>(cfg_, std::move(out), provenance_);
  }

 private:
  ArchitectureConfig cfg_;
  ShapeChain chain_;
  std::vector<ParamGroup<Scalar>> groups_;
  Provenance provenance_;
};

/// Glorot-uniform draw for one group. Each group owns a stream derived from
/// (seed, group index), so reinitializing a single group with the same seed
/// reproduces what build_model would have drawn for it.
template <typename Scalar>
Matrix<Scalar> glorot_uniform(const GroupSpec& spec, int group_index, std::uint64_t seed);

/// Fresh model: Glorot-uniform kernels/weights, zero biases, all trainable.
template <typename Scalar>
FusionModel<Scalar> build_model(const ArchitectureConfig& cfg, std::uint64_t seed);

template <typename Scalar>
Index count_parameters(const FusionModel<Scalar>& model) {
  Index n = 0;
  for (const auto& g : model.groups()) n += g.size();
  return n;
}

template <typename Scalar>
Index count_trainable(const FusionModel<Scalar>& model) {
  Index n = 0;
  for (const auto& g : model.groups()) {
    if (g.trainable) n += g.size();
  }
  return n;
}

std::string to_string(GroupRole role);
std::string to_string(Layer layer);

extern template class FusionModel<float>;
extern template class FusionModel<double>;

}  // namespace fusion
