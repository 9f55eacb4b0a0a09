#include "fusion/network.hpp"

#include <cmath>

namespace fusion {
namespace {

template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
void check_window(const ArchitectureConfig& cfg, const Matrix<Scalar>& w) {
  if (w.cols() != kBranches) {
    throw ShapeError("window triplet has " + std::to_string(w.cols()) + " channels, expected 3");
  }
  if (w.rows() != cfg.window_len) {
    throw ShapeError("window length " + std::to_string(w.rows()) + " != configured " +
                     std::to_string(cfg.window_len));
  }
}

}  // namespace

template <typename Scalar>
Matrix<Scalar> forward_logits(const FusionModel<Scalar>& model,
                              std::span<const WindowRef<Scalar>> windows,
                              ForwardTrace<Scalar>* trace) {
  const auto& cfg = model.config();
  const auto& chain = model.shapes();
  const Index batch = static_cast<Index>(windows.size());
  if (batch == 0) throw ShapeError("forward: empty batch");

  const bool keep_branches =
      trace != nullptr && (model.any_trainable(Layer::Conv1) || model.any_trainable(Layer::Conv2));
  if (trace != nullptr) {
    trace->branches.clear();
    trace->activation_shapes.clear();
    trace->recorded = false;
    if (keep_branches) trace->branches.resize(static_cast<std::size_t>(batch));
  }

  Matrix<Scalar> features(batch, chain.concat);
  for (Index s = 0; s < batch; ++s) {
    const Matrix<Scalar>& window = windows[static_cast<std::size_t>(s)].get();
    check_window(cfg, window);
    for (int b = 0; b < kBranches; ++b) {
      const Vector<Scalar> bias1 = model.value(conv_group(b, 1, true));
      const Vector<Scalar> bias2 = model.value(conv_group(b, 2, true));
      Matrix<Scalar> input = window.col(b);
      Matrix<Scalar> cols1 = im2col(input, cfg.kernel);
      Matrix<Scalar> act1 = relu(conv1d_from_cols(cols1, model.value(conv_group(b, 1, false)), bias1));
      auto pool1 = maxpool1d_forward(act1, cfg.pool, cfg.pool);
      Matrix<Scalar> cols2 = im2col(pool1.values, cfg.kernel);
      Matrix<Scalar> act2 = relu(conv1d_from_cols(cols2, model.value(conv_group(b, 2, false)), bias2));
      auto pool2 = maxpool1d_forward(act2, cfg.pool, cfg.pool);

      // Flatten row-major: feature index = position * channels + channel.
      RowMajorMatrix<Scalar> flat = pool2.values;
      features.row(s).segment(b * chain.flatten_per_branch, chain.flatten_per_branch) =
          Eigen::Map<const RowVector<Scalar>>(flat.data(), flat.size());

      if (trace != nullptr && s == 0) {
        const std::string name = kBranchNames[b];
        trace->activation_shapes.push_back({"input." + name, {input.rows(), input.cols()}});
        trace->activation_shapes.push_back({"conv1." + name, {act1.rows(), act1.cols()}});
        trace->activation_shapes.push_back({"pool1." + name, {pool1.values.rows(), pool1.values.cols()}});
        trace->activation_shapes.push_back({"conv2." + name, {act2.rows(), act2.cols()}});
        trace->activation_shapes.push_back({"pool2." + name, {pool2.values.rows(), pool2.values.cols()}});
        trace->activation_shapes.push_back({"flatten." + name, {flat.size()}});
      }
      if (keep_branches) {
        auto& bt = trace->branches[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)];
        bt.cols1 = std::move(cols1);
        bt.act1 = std::move(act1);
        bt.arg1 = std::move(pool1.argmax);
        bt.cols2 = std::move(cols2);
        bt.act2 = std::move(act2);
        bt.arg2 = std::move(pool2.argmax);
      }
    }
  }

  Matrix<Scalar> hidden =
      relu(dense_forward_batch<Scalar>(features, model.value(kDenseWeight), model.value(kDenseBias)));
  Matrix<Scalar> logits =
      dense_forward_batch<Scalar>(hidden, model.value(kOutputWeight), model.value(kOutputBias));

  if (trace != nullptr) {
    trace->activation_shapes.push_back({"concatenate", {features.cols()}});
    trace->activation_shapes.push_back({"dense", {hidden.cols()}});
    trace->activation_shapes.push_back({"output", {logits.cols()}});
    trace->features = std::move(features);
    trace->hidden = std::move(hidden);
    trace->logits = logits;
    trace->recorded = true;
  }
  return logits;
}

template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& logits) {
  Matrix<Scalar> p(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const Scalar top = logits.row(r).maxCoeff();
    auto e = (logits.row(r).array() - top).exp();
    p.row(r) = (e / e.sum()).matrix();
  }
  return p;
}

template <typename Scalar>
Vector<Scalar> forward(const FusionModel<Scalar>& model, const Matrix<Scalar>& window) {
  const std::array<WindowRef<Scalar>, 1> batch{std::cref(window)};
  return softmax_rows<Scalar>(forward_logits<Scalar>(model, batch)).row(0).transpose();
}

template <typename Scalar>
Gradients<Scalar> backward(const FusionModel<Scalar>& model, const ForwardTrace<Scalar>& trace,
                           const Matrix<Scalar>& dlogits) {
  if (!trace.recorded) throw Error("state", "backward called without a recorded forward pass");
  const auto& cfg = model.config();
  const auto& chain = model.shapes();
  const Index batch = trace.logits.rows();
  if (dlogits.rows() != batch || dlogits.cols() != cfg.classes) {
    throw ShapeError("backward: upstream gradient shape mismatch");
  }
  check_finite(dlogits, "upstream gradient");

  Gradients<Scalar> grads(model.groups().size());
  auto want = [&](int g) { return model.group(g).trainable; };

  if (want(kOutputWeight)) grads[kOutputWeight].noalias() = dlogits.transpose() * trace.hidden;
  if (want(kOutputBias)) grads[kOutputBias] = dlogits.colwise().sum().transpose();

  const bool conv_trainable =
      model.any_trainable(Layer::Conv1) || model.any_trainable(Layer::Conv2);
  if (!model.any_trainable(Layer::Dense) && !conv_trainable) return grads;

  Matrix<Scalar> dhidden = dlogits * model.value(kOutputWeight);
  dhidden = relu_backward(trace.hidden, dhidden);
  if (want(kDenseWeight)) grads[kDenseWeight].noalias() = dhidden.transpose() * trace.features;
  if (want(kDenseBias)) grads[kDenseBias] = dhidden.colwise().sum().transpose();
  if (!conv_trainable) return grads;

  if (trace.branches.size() != static_cast<std::size_t>(batch)) {
    throw Error("state", "forward trace lacks conv caches (model was frozen during forward)");
  }
  const Matrix<Scalar> dfeatures = dhidden * model.value(kDenseWeight);
  const bool conv1_trainable = model.any_trainable(Layer::Conv1);

  for (int b = 0; b < kBranches; ++b) {
    const int k1 = conv_group(b, 1, false), b1 = conv_group(b, 1, true);
    const int k2 = conv_group(b, 2, false), b2 = conv_group(b, 2, true);
    Matrix<Scalar> dk1 = Matrix<Scalar>::Zero(model.value(k1).rows(), model.value(k1).cols());
    Vector<Scalar> db1 = Vector<Scalar>::Zero(model.value(b1).rows());
    Matrix<Scalar> dk2 = Matrix<Scalar>::Zero(model.value(k2).rows(), model.value(k2).cols());
    Vector<Scalar> db2 = Vector<Scalar>::Zero(model.value(b2).rows());

    for (Index s = 0; s < batch; ++s) {
      const auto& bt = trace.branches[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)];
      RowVector<Scalar> flat =
          dfeatures.row(s).segment(b * chain.flatten_per_branch, chain.flatten_per_branch);
      Matrix<Scalar> dpool2 =
          Eigen::Map<const RowMajorMatrix<Scalar>>(flat.data(), chain.pool2_len, cfg.conv2_filters);
      Matrix<Scalar> dz2 =
          relu_backward(bt.act2, maxpool1d_backward(dpool2, bt.arg2, chain.conv2_len));
      auto g2 = conv1d_backward(bt.cols2, model.value(k2), dz2, cfg.kernel, chain.pool1_len,
                                conv1_trainable);
      dk2 += g2.kernel;
      db2 += g2.bias;
      if (conv1_trainable) {
        Matrix<Scalar> dz1 =
            relu_backward(bt.act1, maxpool1d_backward(g2.input, bt.arg1, chain.conv1_len));
        auto g1 = conv1d_backward(bt.cols1, model.value(k1), dz1, cfg.kernel, cfg.window_len, false);
        dk1 += g1.kernel;
        db1 += g1.bias;
      }
    }
    if (want(k1)) grads[static_cast<std::size_t>(k1)] = std::move(dk1);
    if (want(b1)) grads[static_cast<std::size_t>(b1)] = std::move(db1);
    if (want(k2)) grads[static_cast<std::size_t>(k2)] = std::move(dk2);
    if (want(b2)) grads[static_cast<std::size_t>(b2)] = std::move(db2);
  }
  return grads;
}

template <typename Scalar>
BatchLoss<Scalar> batch_crossentropy(const Matrix<Scalar>& logits, std::span<const Index> labels) {
  const Index batch = logits.rows();
  if (static_cast<Index>(labels.size()) != batch) {
    throw ShapeError("batch_crossentropy: label count != batch size");
  }
  BatchLoss<Scalar> r;
  r.probs.resize(batch, logits.cols());
  r.dlogits.resize(batch, logits.cols());
  double total = 0.0;
  for (Index s = 0; s < batch; ++s) {
    const Index label = labels[static_cast<std::size_t>(s)];
    auto sl = softmax_crossentropy<Scalar>(logits.row(s).transpose(), label);
    total += static_cast<double>(sl.loss);
    r.probs.row(s) = sl.probs.transpose();
    r.dlogits.row(s) = softmax_crossentropy_grad<Scalar>(sl.probs, label).transpose() /
                       static_cast<Scalar>(batch);
    if (argmax_lowest(sl.probs) == label) ++r.correct;
  }
  r.data_loss = total / static_cast<double>(batch);
  return r;
}

template <typename Scalar>
Objective<Scalar> objective_and_gradients(const FusionModel<Scalar>& model,
                                          std::span<const WindowRef<Scalar>> windows,
                                          std::span<const Index> labels, const L2Config& l2) {
  ForwardTrace<Scalar> trace;
  Matrix<Scalar> logits = forward_logits(model, windows, &trace);
  auto loss = batch_crossentropy<Scalar>(logits, labels);
  Objective<Scalar> obj;
  obj.data_loss = loss.data_loss;
  obj.penalty = l2_penalty(model, l2);
  obj.total = obj.data_loss + obj.penalty;
  obj.correct = loss.correct;
  if (!std::isfinite(obj.total)) throw NumericError("objective is not finite");
  obj.grads = backward(model, trace, loss.dlogits);
  accumulate_l2_gradient(std::span<const ParamGroup<Scalar>>(model.groups()), l2, obj.grads);
  for (std::size_t i = 0; i < obj.grads.size(); ++i) {
    check_finite(obj.grads[i], "gradient of " + model.groups()[i].spec.name);
  }
  return obj;
}

template <typename Scalar>
double objective_value(const FusionModel<Scalar>& model, std::span<const WindowRef<Scalar>> windows,
                       std::span<const Index> labels, const L2Config& l2) {
  auto loss = batch_crossentropy<Scalar>(forward_logits(model, windows), labels);
  return loss.data_loss + l2_penalty(model, l2);
}

#define FUSION_INSTANTIATE(S)                                                                  \
  template Matrix<S> forward_logits<S>(const FusionModel<S>&, std::span<const WindowRef<S>>,   \
                                       ForwardTrace<S>*);                                      \
  template Matrix<S> softmax_rows<S>(const Matrix<S>&);                                        \
  template Vector<S> forward<S>(const FusionModel<S>&, const Matrix<S>&);                      \
  template Gradients<S> backward<S>(const FusionModel<S>&, const ForwardTrace<S>&,             \
                                    const Matrix<S>&);                                         \
  template BatchLoss<S> batch_crossentropy<S>(const Matrix<S>&, std::span<const Index>);       \
  template Objective<S> objective_and_gradients<S>(const FusionModel<S>&,                      \
                                                   std::span<const WindowRef<S>>,              \
                                                   std::span<const Index>, const L2Config&);   \
  template double objective_value<S>(const FusionModel<S>&, std::span<const WindowRef<S>>,     \
                                     std::span<const Index>, const L2Config&);

FUSION_INSTANTIATE(float)
FUSION_INSTANTIATE(double)

#undef FUSION_INSTANTIATE

}  // namespace fusion
