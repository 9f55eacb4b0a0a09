#include "fusion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace fusion {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t n = 0;
  for (const auto& row : counts) n += std::accumulate(row.begin(), row.end(), std::int64_t{0});
  return n;
}

std::int64_t ConfusionMatrix::true_positives(Index i) const {
  return counts.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(i));
}

std::int64_t ConfusionMatrix::false_positives(Index i) const {
  std::int64_t col = 0;
  for (const auto& row : counts) col += row.at(static_cast<std::size_t>(i));
  return col - true_positives(i);
}

std::int64_t ConfusionMatrix::false_negatives(Index i) const {
  const auto& row = counts.at(static_cast<std::size_t>(i));
  return std::accumulate(row.begin(), row.end(), std::int64_t{0}) - true_positives(i);
}

ConfusionMatrix confusion(std::span<const Index> predictions, std::span<const Index> labels,
                          Index classes, std::vector<std::string> class_names) {
  if (predictions.size() != labels.size()) {
    throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) throw DataError("confusion: empty input");
  if (classes < 1) throw DataError("confusion: classes must be >= 1");
  ConfusionMatrix cm;
  cm.counts.assign(static_cast<std::size_t>(classes),
                   std::vector<std::int64_t>(static_cast<std::size_t>(classes), 0));
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const Index t = labels[s], p = predictions[s];
    if (t < 0 || t >= classes || p < 0 || p >= classes) {
      throw DataError("confusion: class index out of range at sample " + std::to_string(s));
    }
    ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  if (class_names.empty()) {
    for (Index c = 0; c < classes; ++c) class_names.push_back("class_" + std::to_string(c));
  }
  if (static_cast<Index>(class_names.size()) != classes) {
    throw DataError("confusion: class name count != classes");
  }
  cm.class_names = std::move(class_names);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw DataError("accuracy: confusion matrix is empty");
  std::int64_t trace = 0;
  for (Index i = 0; i < cm.classes(); ++i) trace += cm.true_positives(i);
  return static_cast<double>(trace) / static_cast<double>(n);
}

namespace {

double safe_ratio(std::int64_t num, std::int64_t den, bool& defined) {
  defined = den != 0;
  return defined ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

// 2PR/(P+R) written over counts, so it is a single correctly rounded ratio.
double f1_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  const auto den = 2 * tp + fp + fn;
  return den > 0 ? static_cast<double>(2 * tp) / static_cast<double>(den) : 0.0;
}

}  // namespace

Prf1 prf1(const ConfusionMatrix& cm) {
  Prf1 out;
  std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0, support_sum = 0;
  Index counted = 0;
  for (Index i = 0; i < cm.classes(); ++i) {
    const auto tp = cm.true_positives(i), fp = cm.false_positives(i), fn = cm.false_negatives(i);
    ClassScores s;
    s.precision = safe_ratio(tp, tp + fp, s.precision_defined);
    s.recall = safe_ratio(tp, tp + fn, s.recall_defined);
    s.f1 = f1_from_counts(tp, fp, fn);
    s.support = tp + fn;
    s.excluded = !s.precision_defined && !s.recall_defined;
    out.per_class.push_back(s);

    tp_sum += tp;
    fp_sum += fp;
    fn_sum += fn;
    support_sum += s.support;
    if (!s.excluded) {
      out.macro.precision += s.precision;
      out.macro.recall += s.recall;
      out.macro.f1 += s.f1;
      ++counted;
    }
    out.weighted.precision += s.precision * static_cast<double>(s.support);
    out.weighted.recall += s.recall * static_cast<double>(s.support);
    out.weighted.f1 += s.f1 * static_cast<double>(s.support);
  }
  if (counted > 0) {
    out.macro.precision /= static_cast<double>(counted);
    out.macro.recall /= static_cast<double>(counted);
    out.macro.f1 /= static_cast<double>(counted);
  }
  if (support_sum > 0) {
    out.weighted.precision /= static_cast<double>(support_sum);
    out.weighted.recall /= static_cast<double>(support_sum);
    out.weighted.f1 /= static_cast<double>(support_sum);
  }
  bool unused = false;
  out.micro.precision = safe_ratio(tp_sum, tp_sum + fp_sum, unused);
  out.micro.recall = safe_ratio(tp_sum, tp_sum + fn_sum, unused);
  out.micro.f1 = f1_from_counts(tp_sum, fp_sum, fn_sum);
  return out;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw DataError("roc_auc: scores/labels length mismatch");
  const auto pos = std::count(positive.begin(), positive.end(), true);
  const auto neg = static_cast<std::int64_t>(positive.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw DataError("roc_auc: need at least one positive and one negative sample");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});  // threshold +inf
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (positive[order[i]]) ++tp; else ++fp;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
  }
  curve.points.push_back({1.0, 1.0});  // threshold -inf

  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return curve;
}

RocCurve roc_auc(const Matrix<double>& probs, std::span<const Index> labels, Index cls) {
  if (probs.rows() != static_cast<Index>(labels.size())) {
    throw DataError("roc_auc: probability rows != label count");
  }
  if (cls < 0 || cls >= probs.cols()) throw DataError("roc_auc: class index out of range");
  std::vector<double> scores(labels.size());
  // vector<bool> has no contiguous storage.
  auto flags = std::make_unique<bool[]>(labels.size());
  for (std::size_t s = 0; s < labels.size(); ++s) {
    scores[s] = probs(static_cast<Index>(s), cls);
    flags[s] = labels[s] == cls;
  }
  auto curve = roc_auc(scores, std::span<const bool>(flags.get(), labels.size()));
  curve.class_index = cls;
  return curve;
}

double z_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const double target = 1.0 - alpha / 2.0;
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ConfidenceInterval confidence_interval(double p_hat, std::int64_t n, double alpha) {
  if (n < 1) throw DataError("confidence_interval: n must be >= 1");
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw DataError("confidence_interval: p_hat outside [0, 1]");
  const double z = z_value(alpha);
  return {p_hat, n, z, z * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n))};
}

MetricsReport build_report(std::span<const Index> predictions, std::span<const Index> labels,
                           const Matrix<double>& probs, std::vector<std::string> class_names) {
  const auto classes = probs.cols();
  MetricsReport r;
  r.confusion = confusion(predictions, labels, classes, std::move(class_names));
  r.accuracy = accuracy(r.confusion);
  r.scores = prf1(r.confusion);
  r.ci = confidence_interval(r.accuracy, r.confusion.total());
  for (Index c = 0; c < classes; ++c) {
    const auto present = std::count(labels.begin(), labels.end(), c);
    if (present == 0 || present == static_cast<std::ptrdiff_t>(labels.size())) {
      r.notes.push_back("roc skipped for " + r.confusion.class_names[static_cast<std::size_t>(c)] +
                        ": single-class input");
      continue;
    }
    r.roc.push_back(roc_auc(probs, labels, c));
  }
  return r;
}

}  // namespace fusion
