#include "fusion/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace fusion {

std::string to_string(FaultClass c) {
  switch (c) {
    case FaultClass::Healthy: return "Healthy";
    case FaultClass::InnerFault: return "InnerFault";
    case FaultClass::OuterFault: return "OuterFault";
  }
  return "?";
}

FaultClass parse_fault_class(const std::string& name) {
  if (name == "Healthy") return FaultClass::Healthy;
  if (name == "InnerFault") return FaultClass::InnerFault;
  if (name == "OuterFault") return FaultClass::OuterFault;
  throw DataError("label '" + name + "' is not one of Healthy, InnerFault, OuterFault");
}

std::vector<std::string> class_names() { return {"Healthy", "InnerFault", "OuterFault"}; }

void validate(const OperatingCondition& oc) {
  if (!(oc.rotational_speed > 0 && oc.load_torque > 0 && oc.radial_force > 0)) {
    throw DataError("operating condition '" + oc.name + "': rpm, torque and force must be positive");
  }
}

void validate(const Recording& rec) {
  if (rec.samples.cols() != 3) {
    throw DataError("recording '" + rec.id + "': channel count must be 3, got " +
                    std::to_string(rec.samples.cols()));
  }
  if (!(rec.sample_rate > 0)) throw DataError("recording '" + rec.id + "': sample_rate must be > 0");
  validate(rec.condition);
}

std::array<Index, kClassCount> WindowSet::class_counts() const {
  std::array<Index, kClassCount> counts{};
  for (const auto& w : windows) ++counts[static_cast<std::size_t>(w.label)];
  return counts;
}

void WindowSet::append(WindowSet other) {
  if (windows.empty()) {
    window_len = other.window_len;
    stride = other.stride;
  } else if (other.window_len != window_len || other.stride != stride) {
    throw DataError("cannot merge window sets with different window_len/stride");
  }
  for (auto& w : other.windows) windows.push_back(std::move(w));
}

// ---------------------------------------------------------------------------

ChannelStats standardize_fit(std::span<const double> x) {
  if (x.empty()) throw DataError("standardize_fit: empty input");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

std::vector<double> standardize_apply(std::span<const double> x, const ChannelStats& stats) {
  std::vector<double> out(x.size(), 0.0);
  if (stats.std < kStdFloor) return out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - stats.mean) / stats.std;
  return out;
}

namespace {

// Two-pass statistics over float columns, accumulated in double.
ChannelStats column_stats(const std::vector<const Eigen::MatrixXf*>& blocks, Index channel) {
  double n = 0.0, sum = 0.0;
  for (const auto* b : blocks) {
    sum += b->col(channel).cast<double>().sum();
    n += static_cast<double>(b->rows());
  }
  if (n == 0.0) throw DataError("standardize_fit: empty input");
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto* b : blocks) ss += (b->col(channel).cast<double>().array() - mean).square().sum();
  return {mean, std::sqrt(ss / n)};
}

void apply_stats(const ChannelStats& s, Eigen::MatrixXf& m, Index channel) {
  if (s.std < kStdFloor) {
    m.col(channel).setZero();
    return;
  }
  m.col(channel) =
      ((m.col(channel).cast<double>().array() - s.mean) / s.std).cast<float>().matrix();
}

}  // namespace

Standardizer fit_standardizer(const WindowSet& ws, std::span<const std::size_t> indices) {
  std::vector<const Eigen::MatrixXf*> blocks;
  for (auto i : indices) blocks.push_back(&ws.windows.at(i).data);
  Standardizer s;
  for (Index c = 0; c < 3; ++c) s.channels[static_cast<std::size_t>(c)] = column_stats(blocks, c);
  return s;
}

void apply_standardizer(const Standardizer& s, WindowSet& ws) {
  for (auto& w : ws.windows) {
    for (Index c = 0; c < 3; ++c) apply_stats(s.channels[static_cast<std::size_t>(c)], w.data, c);
  }
}

void standardize_recording(Recording& rec) {
  const std::vector<const Eigen::MatrixXf*> blocks{&rec.samples};
  for (Index c = 0; c < rec.samples.cols(); ++c) apply_stats(column_stats(blocks, c), rec.samples, c);
}

// ---------------------------------------------------------------------------

Index window_count(Index length, Index window_len, Index stride) {
  if (window_len < 1 || stride < 1) throw DataError("window_len and stride must be >= 1");
  if (length < window_len) return 0;
  return (length - window_len) / stride + 1;
}

WindowSet segment(const Recording& rec, Index window_len, Index stride) {
  validate(rec);
  const Index length = rec.samples.rows();
  const Index n = window_count(length, window_len, stride);
  if (n == 0) {
    throw DataError("recording '" + rec.id + "' has " + std::to_string(length) +
                    " samples, shorter than window " + std::to_string(window_len));
  }
  WindowSet ws;
  ws.window_len = window_len;
  ws.stride = stride;
  ws.windows.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    ws.windows.push_back({rec.samples.middleRows(i * stride, window_len), rec.label, rec.id, i * stride});
  }
  return ws;
}

// ---------------------------------------------------------------------------

std::string to_string(SplitMode m) {
  return m == SplitMode::WindowLevel ? "window" : "recording";
}

SplitMode parse_split_mode(const std::string& name) {
  if (name == "window") return SplitMode::WindowLevel;
  if (name == "recording") return SplitMode::RecordingLevel;
  throw ConfigError("split mode must be 'window' or 'recording', got '" + name + "'");
}

std::vector<Index> largest_remainder(std::span<const Index> counts, Index total) {
  const Index n = std::accumulate(counts.begin(), counts.end(), Index{0});
  std::vector<Index> alloc(counts.size(), 0);
  if (n == 0) return alloc;
  std::vector<std::pair<Index, std::size_t>> remainders;  // (numerator remainder, class)
  Index assigned = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const Index num = counts[c] * total;
    alloc[c] = num / n;
    assigned += alloc[c];
    remainders.emplace_back(num % n, c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (Index i = 0; i < total - assigned; ++i) ++alloc[remainders[static_cast<std::size_t>(i)].second];
  return alloc;
}

namespace {

struct Selection {
  std::vector<std::size_t> selected;
  std::vector<std::size_t> rest;
};

// Chooses round(|candidates| * fraction) candidates stratified by class.
Selection select_stratified(const WindowSet& ws, std::span<const std::size_t> candidates,
                            double fraction, std::uint64_t seed, SplitMode mode) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (auto i : candidates) by_class[static_cast<std::size_t>(ws.windows.at(i).label)].push_back(i);
  std::vector<Index> counts;
  for (int c = 0; c < kClassCount; ++c) {
    if (by_class[static_cast<std::size_t>(c)].empty()) {
      throw DataError("class " + to_string(static_cast<FaultClass>(c)) + " has no windows");
    }
    counts.push_back(static_cast<Index>(by_class[static_cast<std::size_t>(c)].size()));
  }
  const auto n = static_cast<Index>(candidates.size());
  const auto target = static_cast<Index>(std::llround(static_cast<double>(n) * fraction));
  if (target == 0) throw DataError("split selects zero windows; increase the fraction");
  if (target == n) throw DataError("split leaves zero windows in the remainder");
  const auto quota = largest_remainder(counts, target);

  Selection out;
  for (int c = 0; c < kClassCount; ++c) {
    auto idx = by_class[static_cast<std::size_t>(c)];
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(c) + 101));
    const Index q = quota[static_cast<std::size_t>(c)];
    if (mode == SplitMode::WindowLevel) {
      std::shuffle(idx.begin(), idx.end(), rng);
      out.selected.insert(out.selected.end(), idx.begin(), idx.begin() + q);
      out.rest.insert(out.rest.end(), idx.begin() + q, idx.end());
      continue;
    }
    // Recording-level: whole recordings, greedily approaching the quota.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (auto i : idx) {
      const auto& id = ws.windows[i].recording_id;
      if (!groups.contains(id)) order.push_back(id);
      groups[id].push_back(i);
    }
    std::shuffle(order.begin(), order.end(), rng);
    Index taken = 0;
    for (const auto& id : order) {
      const auto& g = groups[id];
      const auto size = static_cast<Index>(g.size());
      const bool take = std::llabs(taken + size - q) < std::llabs(taken - q);
      auto& dst = take ? out.selected : out.rest;
      dst.insert(dst.end(), g.begin(), g.end());
      if (take) taken += size;
    }
  }
  if (out.selected.empty() || out.rest.empty()) {
    throw DataError("recording-level split produced an empty partition; add recordings");
  }
  std::sort(out.selected.begin(), out.selected.end());
  std::sort(out.rest.begin(), out.rest.end());
  return out;
}

}  // namespace

SplitPlan split_stratified(const WindowSet& ws, double test_fraction, std::uint64_t seed,
                           SplitMode mode) {
  std::vector<std::size_t> all(ws.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto sel = select_stratified(ws, all, test_fraction, seed, mode);
  SplitPlan plan;
  plan.ratios = {1.0 - test_fraction, test_fraction};
  plan.seed = seed;
  plan.mode = mode;
  plan.train = std::move(sel.rest);
  plan.test = std::move(sel.selected);
  return plan;
}

SplitPlan split_three_way(const WindowSet& ws, double validation_fraction, double test_fraction,
                          std::uint64_t seed, SplitMode mode) {
  if (!(validation_fraction > 0.0 && test_fraction > 0.0 &&
        validation_fraction + test_fraction < 1.0)) {
    throw ConfigError("validation and test fractions must be positive and sum below 1");
  }
  SplitPlan plan = split_stratified(ws, test_fraction, seed, mode);
  auto sel = select_stratified(ws, plan.train, validation_fraction / (1.0 - test_fraction),
                               mix_seed(seed, 7), mode);
  plan.ratios = {1.0 - validation_fraction - test_fraction, validation_fraction, test_fraction};
  plan.train = std::move(sel.rest);
  plan.validation = std::move(sel.selected);
  return plan;
}

std::vector<Fold> kfold(const WindowSet& ws, std::span<const std::size_t> partition, int k,
                        std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold: k must be >= 2");
  if (partition.size() < static_cast<std::size_t>(k)) {
    throw DataError("kfold: k=" + std::to_string(k) + " exceeds the " +
                    std::to_string(partition.size()) + " windows in the partition");
  }
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (auto i : partition) by_class[static_cast<std::size_t>(ws.windows.at(i).label)].push_back(i);

  std::vector<Fold> folds(static_cast<std::size_t>(k));
  std::size_t offset = 0;
  for (int c = 0; c < kClassCount; ++c) {
    auto idx = by_class[static_cast<std::size_t>(c)];
    if (idx.empty()) continue;
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(c) + 201));
    std::shuffle(idx.begin(), idx.end(), rng);
    // Offsetting each class's round-robin start keeps total fold sizes within 1.
    for (std::size_t p = 0; p < idx.size(); ++p) {
      folds[(p + offset) % static_cast<std::size_t>(k)].validation.push_back(idx[p]);
    }
    offset += idx.size();
  }
  for (auto& f : folds) {
    std::sort(f.validation.begin(), f.validation.end());
    for (auto i : partition) {
      if (!std::binary_search(f.validation.begin(), f.validation.end(), i)) f.train.push_back(i);
    }
  }
  return folds;
}

// ---------------------------------------------------------------------------

std::string to_string(StandardizeScope s) {
  return s == StandardizeScope::TrainPartition ? "train" : "recording";
}

StandardizeScope parse_standardize_scope(const std::string& name) {
  if (name == "train") return StandardizeScope::TrainPartition;
  if (name == "recording") return StandardizeScope::PerRecording;
  throw ConfigError("standardize scope must be 'train' or 'recording', got '" + name + "'");
}

PreparedData prepare(std::vector<Recording> recordings, const PipelineConfig& cfg,
                     const Standardizer* fixed) {
  if (recordings.empty()) throw DataError("no recordings to prepare");
  PreparedData out;
  for (auto& rec : recordings) {
    if (cfg.scope == StandardizeScope::PerRecording) standardize_recording(rec);
    out.windows.append(segment(rec, cfg.window_len, cfg.stride));
  }
  if (cfg.all_test) {
    out.plan.ratios = {0.0, 1.0};
    out.plan.seed = cfg.seed;
    out.plan.mode = cfg.mode;
    out.plan.test.resize(out.windows.size());
    std::iota(out.plan.test.begin(), out.plan.test.end(), std::size_t{0});
  } else if (cfg.validation_fraction > 0.0) {
    out.plan = split_three_way(out.windows, cfg.validation_fraction, cfg.test_fraction, cfg.seed,
                               cfg.mode);
  } else {
    out.plan = split_stratified(out.windows, cfg.test_fraction, cfg.seed, cfg.mode);
  }
  if (cfg.scope == StandardizeScope::TrainPartition) {
    if (fixed != nullptr) {
      out.standardizer = *fixed;
    } else {
      if (out.plan.train.empty()) throw DataError("cannot fit standardization: no training windows");
      out.standardizer = fit_standardizer(out.windows, out.plan.train);
    }
    apply_standardizer(*out.standardizer, out.windows);
  }
  return out;
}

}  // namespace fusion
