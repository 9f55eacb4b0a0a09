#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fusion/model.hpp"

namespace fusion {

/// Gradient buffers aligned with a model's parameter groups. A 0x0 entry
/// means "no gradient" (the group is frozen).
template <typename Scalar>
using Gradients = std::vector<Matrix<Scalar>>;

struct L2Config {
  double lambda = 0.0;
  std::vector<GroupRole> applies_to = {GroupRole::ConvKernel, GroupRole::DenseWeight};

  bool covers(GroupRole role) const {
    return std::find(applies_to.begin(), applies_to.end(), role) != applies_to.end();
  }
};

inline void validate(const L2Config& cfg) {
  if (!(cfg.lambda >= 0.0)) throw ConfigError("l2 lambda must be >= 0");
}

/// lambda * sum of squared covered weights, accumulated in double. Frozen
/// groups still contribute (they are part of the objective, just constant).
template <typename Scalar>
double l2_penalty(std::span<const ParamGroup<Scalar>> groups, const L2Config& cfg) {
  validate(cfg);
  if (cfg.lambda == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& g : groups) {
    if (cfg.covers(g.spec.role)) sum += g.value.template cast<double>().squaredNorm();
  }
  return cfg.lambda * sum;
}

template <typename Scalar>
double l2_penalty(const FusionModel<Scalar>& model, const L2Config& cfg) {
  return l2_penalty(std::span<const ParamGroup<Scalar>>(model.groups()), cfg);
}

/// The penalty's gradient for one group: 2*lambda*w, or zeros when not covered.
template <typename Scalar>
Matrix<Scalar> l2_gradient(const ParamGroup<Scalar>& group, const L2Config& cfg) {
  validate(cfg);
  if (!cfg.covers(group.spec.role) || cfg.lambda == 0.0) {
    return Matrix<Scalar>::Zero(group.value.rows(), group.value.cols());
  }
  return Scalar(2.0 * cfg.lambda) * group.value;
}

/// Adds 2*lambda*w into every existing gradient buffer of a covered group.
template <typename Scalar>
void accumulate_l2_gradient(std::span<const ParamGroup<Scalar>> groups, const L2Config& cfg,
                            Gradients<Scalar>& grads) {
  validate(cfg);
  if (cfg.lambda == 0.0) return;
  const auto scale = static_cast<Scalar>(2.0 * cfg.lambda);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (grads[i].size() == 0 || !cfg.covers(groups[i].spec.role)) continue;
    grads[i] += scale * groups[i].value;
  }
}

template <typename Scalar>
struct AdamState {
  std::vector<Matrix<Scalar>> first_moment;
  std::vector<Matrix<Scalar>> second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Zero moments shaped like each group.
template <typename Scalar>
AdamState<Scalar> make_adam_state(std::span<const ParamGroup<Scalar>> groups) {
  AdamState<Scalar> s;
  for (const auto& g : groups) {
    s.first_moment.push_back(Matrix<Scalar>::Zero(g.value.rows(), g.value.cols()));
    s.second_moment.push_back(Matrix<Scalar>::Zero(g.value.rows(), g.value.cols()));
  }
  return s;
}

template <typename Scalar>
AdamState<Scalar> make_adam_state(const FusionModel<Scalar>& model) {
  return make_adam_state(std::span<const ParamGroup<Scalar>>(model.groups()));
}

/// One bias-corrected Adam update. Groups with `trainable == false` are not
/// touched, whatever their gradient holds.
template <typename Scalar>
void adam_step(std::span<ParamGroup<Scalar>> groups, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (grads.size() != groups.size() || state.first_moment.size() != groups.size() ||
      state.second_moment.size() != groups.size()) {
    throw ShapeError("adam_step: group count mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const auto bc1 = static_cast<Scalar>(1.0 - std::pow(state.beta1, t));
  const auto bc2 = static_cast<Scalar>(1.0 - std::pow(state.beta2, t));
  const auto b1 = static_cast<Scalar>(state.beta1);
  const auto b2 = static_cast<Scalar>(state.beta2);
  const auto eps = static_cast<Scalar>(state.epsilon);
  const auto lr = static_cast<Scalar>(learning_rate);

  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto& p = groups[i];
    if (!p.trainable) continue;
    const auto& g = grads[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (g.rows() != p.value.rows() || g.cols() != p.value.cols() || m.rows() != g.rows() ||
        m.cols() != g.cols() || v.rows() != g.rows() || v.cols() != g.cols()) {
      throw ShapeError("adam_step: shape mismatch in group " + p.spec.name);
    }
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
    p.value.array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  }
}

template <typename Scalar>
void adam_step(FusionModel<Scalar>& model, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, double learning_rate) {
  adam_step(std::span<ParamGroup<Scalar>>(model.groups()), grads, state, learning_rate);
}

}  // namespace fusion
