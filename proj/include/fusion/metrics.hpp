#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fusion/tensor.hpp"

namespace fusion {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::string> class_names;

  Index classes() const { return static_cast<Index>(counts.size()); }
  std::int64_t total() const;
  std::int64_t true_positives(Index i) const;
  std::int64_t false_positives(Index i) const;  // column sum minus diagonal
  std::int64_t false_negatives(Index i) const;  // row sum minus diagonal

  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws DataError on empty or mismatched input, or an index outside [0, classes).
ConfusionMatrix confusion(std::span<const Index> predictions, std::span<const Index> labels,
                          Index classes, std::vector<std::string> class_names = {});

/// trace / total. Throws DataError when the matrix is empty.
double accuracy(const ConfusionMatrix& cm);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  bool precision_defined = true;  // false: 0/0, reported as 0
  bool recall_defined = true;
  bool excluded = false;          // never predicted and never present

  bool operator==(const ClassScores&) const = default;
};

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Averages&) const = default;
};

struct Prf1 {
  std::vector<ClassScores> per_class;
  Averages macro;     // unweighted over non-excluded classes
  Averages micro;     // pooled counts; precision == recall == accuracy
  Averages weighted;  // by support

  bool operator==(const Prf1&) const = default;
};

Prf1 prf1(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  Index class_index = 0;
  std::vector<RocPoint> points;  // from threshold +inf down to -inf
  double auc = 0.0;

  bool operator==(const RocCurve&) const = default;
};

/// ROC over descending distinct scores with sentinel thresholds at +/-inf;
/// AUC by the trapezoid rule. Throws DataError unless both positives and
/// negatives are present.
RocCurve roc_auc(std::span<const double> scores, std::span<const bool> positive);

/// One-vs-rest curve for `cls` from per-sample probability rows.
RocCurve roc_auc(const Matrix<double>& probs, std::span<const Index> labels, Index cls);

/// Two-sided standard normal quantile z_{alpha/2}; 1.959964 at alpha = 0.05.
double z_value(double alpha);

struct ConfidenceInterval {
  double p_hat = 0.0;
  std::int64_t n = 0;
  double z = 0.0;
  double half_width = 0.0;

  bool operator==(const ConfidenceInterval&) const = default;
};

/// Normal-approximation interval p_hat +/- z * sqrt(p_hat (1 - p_hat) / n).
ConfidenceInterval confidence_interval(double p_hat, std::int64_t n, double alpha = 0.05);

struct MetricsReport {
  double accuracy = 0.0;
  Prf1 scores;
  ConfusionMatrix confusion;
  ConfidenceInterval ci;
  std::vector<RocCurve> roc;
  std::int64_t trainable_params = 0;
  double wall_seconds = 0.0;
  std::string source_condition;
  std::string target_condition;
  std::vector<std::string> notes;

  bool operator==(const MetricsReport&) const = default;
};

/// Everything derivable from predictions, labels and probability rows.
/// ROC entries are produced only for classes with both positives and negatives.
MetricsReport build_report(std::span<const Index> predictions, std::span<const Index> labels,
                           const Matrix<double>& probs, std::vector<std::string> class_names);

}  // namespace fusion
