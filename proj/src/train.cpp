#include "fusion/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "fusion/network.hpp"

namespace fusion {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_disjoint(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<std::size_t> both;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
  if (!both.empty()) throw DataError("train and validation partitions overlap");
}

struct Batch {
  std::vector<WindowRef<float>> windows;
  std::vector<Index> labels;
};

Batch gather(const WindowSet& data, std::span<const std::size_t> idx) {
  Batch b;
  b.windows.reserve(idx.size());
  b.labels.reserve(idx.size());
  for (auto i : idx) {
    const auto& w = data.windows.at(i);
    b.windows.push_back(std::cref(w.data));
    b.labels.push_back(static_cast<Index>(w.label));
  }
  return b;
}

}  // namespace

void validate(const Hyperparams& hp) {
  if (!(hp.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (hp.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (hp.epochs < 1) throw ConfigError("epochs must be >= 1");
  validate(hp.l2);
}

Hyperparams fine_tune_defaults() {
  Hyperparams hp;
  hp.learning_rate = 1e-5;
  return hp;
}

std::string history_csv(const TrainHistory& h) {
  std::ostringstream s;
  s << "epoch,train_loss,train_acc,val_loss,val_acc,seconds\n";
  char buf[256];
  for (const auto& e : h.epochs) {
    if (e.has_validation) {
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.6f\n", e.epoch, e.train_loss,
                    e.train_acc, e.val_loss, e.val_acc, e.seconds);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,,,%.6f\n", e.epoch, e.train_loss, e.train_acc,
                    e.seconds);
    }
    s << buf;
  }
  return s.str();
}

void to_json(Json& j, const TrainHistory& h) {
  Json epochs = Json::array();
  for (const auto& e : h.epochs) {
    Json row{{"epoch", e.epoch},         {"train_loss", e.train_loss}, {"train_acc", e.train_acc},
             {"l2_penalty", e.l2_penalty}, {"seconds", e.seconds}};
    if (e.has_validation) {
      row["val_loss"] = e.val_loss;
      row["val_acc"] = e.val_acc;
    }
    epochs.push_back(std::move(row));
  }
  j = Json{{"epochs", epochs},
           {"trainable_params", h.trainable_params},
           {"total_seconds", h.total_seconds}};
}

std::vector<std::size_t> epoch_order(std::span<const std::size_t> indices, std::uint64_t seed,
                                     int epoch) {
  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(epoch) + 1));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

TrainHistory train(FusionModel<float>& model, const WindowSet& data,
                   std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                   const Hyperparams& hp, const EpochCallback& on_epoch) {
  validate(hp);
  if (train_idx.empty()) throw DataError("training set is empty");
  check_disjoint(train_idx, val_idx);

  const auto start = Clock::now();
  TrainHistory history;
  history.trainable_params = count_trainable(model);
  auto state = make_adam_state(model);
  const auto batch_size = static_cast<std::size_t>(hp.batch_size);

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    const auto order = epoch_order(train_idx, hp.seed, epoch);
    double weighted_objective = 0.0;
    Index correct = 0;
    for (std::size_t first = 0; first < order.size(); first += batch_size) {
      const std::size_t n = std::min(batch_size, order.size() - first);
      const auto batch = gather(data, std::span(order).subspan(first, n));
      Objective<float> obj;
      try {
        obj = objective_and_gradients<float>(model, batch.windows, batch.labels, hp.l2);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch + 1) + ", batch starting at " +
                           std::to_string(first) + ": " + e.what());
      }
      weighted_objective += obj.total * static_cast<double>(n);
      correct += obj.correct;
      adam_step(model, obj.grads, state, hp.learning_rate);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = weighted_objective / static_cast<double>(order.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    rec.l2_penalty = l2_penalty(model, hp.l2);
    if (!val_idx.empty()) {
      const auto v = objective_on(model, data, val_idx, hp.l2, hp.batch_size);
      rec.val_loss = v.total;
      rec.val_acc = v.accuracy;
      rec.has_validation = true;
    }
    rec.seconds = seconds_since(epoch_start);
    history.epochs.push_back(rec);
    if (on_epoch && !on_epoch(rec)) break;
  }
  history.total_seconds = seconds_since(start);
  return history;
}

Predictions predict(const FusionModel<float>& model, const WindowSet& data,
                    std::span<const std::size_t> idx, Index batch_size) {
  if (idx.empty()) throw DataError("predict: empty window set");
  Predictions p;
  p.probs.resize(static_cast<Index>(idx.size()), model.config().classes);
  const auto step = static_cast<std::size_t>(std::max<Index>(1, batch_size));
  for (std::size_t first = 0; first < idx.size(); first += step) {
    const std::size_t n = std::min(step, idx.size() - first);
    const auto batch = gather(data, idx.subspan(first, n));
    const Matrix<float> logits = forward_logits<float>(model, batch.windows);
    // Softmax in double so probability rows sum to 1 tightly.
    p.probs.middleRows(static_cast<Index>(first), static_cast<Index>(n)) =
        softmax_rows<double>(logits.cast<double>());
    p.labels.insert(p.labels.end(), batch.labels.begin(), batch.labels.end());
  }
  for (Index r = 0; r < p.probs.rows(); ++r) p.predicted.push_back(argmax_lowest(p.probs.row(r)));
  return p;
}

SetObjective objective_on(const FusionModel<float>& model, const WindowSet& data,
                          std::span<const std::size_t> idx, const L2Config& l2, Index batch_size) {
  const auto p = predict(model, data, idx, batch_size);
  SetObjective o;
  Index correct = 0;
  for (std::size_t s = 0; s < p.labels.size(); ++s) {
    const double prob = p.probs(static_cast<Index>(s), p.labels[s]);
    o.data_loss -= std::log(prob);
    if (p.predicted[s] == p.labels[s]) ++correct;
  }
  o.data_loss /= static_cast<double>(p.labels.size());
  o.penalty = l2_penalty(model, l2);
  o.total = o.data_loss + o.penalty;
  o.accuracy = static_cast<double>(correct) / static_cast<double>(p.labels.size());
  if (!std::isfinite(o.total)) throw NumericError("objective on evaluation set is not finite");
  return o;
}

MetricsReport evaluate(const FusionModel<float>& model, const WindowSet& data,
                       std::span<const std::size_t> idx) {
  if (idx.empty()) throw DataError("evaluate: empty test set");
  const auto start = Clock::now();
  const auto p = predict(model, data, idx);
  auto names = class_names();
  names.resize(static_cast<std::size_t>(model.config().classes));
  for (std::size_t c = kClassCount; c < names.size(); ++c) names[c] = "class_" + std::to_string(c);
  auto report = build_report(p.predicted, p.labels, p.probs, names);
  report.trainable_params = count_trainable(model);
  report.wall_seconds = seconds_since(start);
  return report;
}

CrossValResult crossval(const ModelBuilder& build, const WindowSet& data,
                        std::span<const std::size_t> partition, int k, const Hyperparams& hp) {
  const auto folds = kfold(data, partition, k, hp.seed);
  CrossValResult out;
  for (const auto& fold : folds) {
    auto model = build();
    out.histories.push_back(train(model, data, fold.train, fold.validation, hp));
    out.final_val_accuracy.push_back(out.histories.back().epochs.back().val_acc);
  }
  const double n = static_cast<double>(out.final_val_accuracy.size());
  for (double a : out.final_val_accuracy) out.mean_val_accuracy += a / n;
  double ss = 0.0;
  for (double a : out.final_val_accuracy) ss += (a - out.mean_val_accuracy) * (a - out.mean_val_accuracy);
  out.std_val_accuracy = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return out;
}

}  // namespace fusion
