#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "fusion/kernels.hpp"
#include "fusion/model.hpp"
#include "fusion/optim.hpp"

namespace fusion {

/// A window triplet: window_len x 3, one column per branch in
/// phase_current_1, phase_current_2, vibration order.
template <typename Scalar>
using WindowRef = std::reference_wrapper<const Matrix<Scalar>>;

template <typename Scalar>
struct BranchTrace {
  Matrix<Scalar> cols1;  // im2col of the input column
  Matrix<Scalar> act1;   // relu(conv1)
  IndexMatrix arg1;
  Matrix<Scalar> cols2;  // im2col of pool1 output
  Matrix<Scalar> act2;   // relu(conv2)
  IndexMatrix arg2;
};

/// Intermediate values recorded by forward() for backward().
template <typename Scalar>
struct ForwardTrace {
  std::vector<std::array<BranchTrace<Scalar>, kBranches>> branches;  // per sample
  Matrix<Scalar> features;  // batch x concat
  Matrix<Scalar> hidden;    // batch x dense_units, post-relu
  Matrix<Scalar> logits;    // batch x classes
  std::vector<LayerShape> activation_shapes;  // of the first sample
  bool recorded = false;
};

/// Logits for a batch (one row per window). When `trace` is given it is
/// filled for a subsequent backward(); per-branch caches are only kept when
/// some conv group is trainable.
template <typename Scalar>
Matrix<Scalar> forward_logits(const FusionModel<Scalar>& model,
                              std::span<const WindowRef<Scalar>> windows,
                              ForwardTrace<Scalar>* trace = nullptr);

/// Row-wise softmax of a batch of logits.
template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& logits);

/// Class probabilities for one window triplet.
template <typename Scalar>
Vector<Scalar> forward(const FusionModel<Scalar>& model, const Matrix<Scalar>& window);

/// Reverse-mode pass from d(objective)/d(logits). Frozen groups get a 0x0
/// buffer.
template <typename Scalar>
Gradients<Scalar> backward(const FusionModel<Scalar>& model, const ForwardTrace<Scalar>& trace,
                           const Matrix<Scalar>& dlogits);

template <typename Scalar>
struct BatchLoss {
  double data_loss = 0.0;   // mean cross-entropy over the batch
  Matrix<Scalar> probs;     // batch x classes
  Matrix<Scalar> dlogits;   // gradient of the mean loss
  Index correct = 0;        // argmax hits, ties to the lowest class
};

template <typename Scalar>
BatchLoss<Scalar> batch_crossentropy(const Matrix<Scalar>& logits, std::span<const Index> labels);

/// argmax with ties broken toward the lowest index.
template <typename Derived>
Index argmax_lowest(const Eigen::MatrixBase<Derived>& row) {
  Index best = 0;
  for (Index i = 1; i < row.size(); ++i) {
    if (row(i) > row(best)) best = i;
  }
  return best;
}

template <typename Scalar>
struct Objective {
  double data_loss = 0.0;
  double penalty = 0.0;
  double total = 0.0;  // data_loss + penalty
  Index correct = 0;
  Gradients<Scalar> grads;
};

/// Mean cross-entropy plus L2 penalty over one batch, with gradients for every
/// trainable group (penalty gradient included).
template <typename Scalar>
Objective<Scalar> objective_and_gradients(const FusionModel<Scalar>& model,
                                          std::span<const WindowRef<Scalar>> windows,
                                          std::span<const Index> labels, const L2Config& l2);

/// Objective value only.
template <typename Scalar>
double objective_value(const FusionModel<Scalar>& model, std::span<const WindowRef<Scalar>> windows,
                       std::span<const Index> labels, const L2Config& l2);

}  // namespace fusion
