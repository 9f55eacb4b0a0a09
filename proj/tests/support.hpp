#pragma once
// Independent oracles shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "fusion/metrics.hpp"
#include "fusion/model.hpp"
#include "fusion/network.hpp"
#include "fusion/synth.hpp"

namespace support {

using fusion::Index;

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

inline fusion::ArchitectureConfig tiny_config() {
  fusion::ArchitectureConfig cfg;
  cfg.window_len = 32;
  cfg.conv1_filters = 2;
  cfg.conv2_filters = 4;
  cfg.dense_units = 8;
  return cfg;
}

struct GradCheck {
  Index checked = 0;
  Index kinks = 0;  // perturbation crossed a ReLU/max-pool switch; FD is not a derivative there
  Index failures = 0;
  double max_rel = 0.0;  // among parameters above the absolute floor
  double max_abs = 0.0;
  double max_rel_any = 0.0;  // every parameter with a gradient above 1e-6
};

// Sign pattern of every ReLU plus every pool winner.
inline std::vector<Index> switch_pattern(const fusion::FusionModel<double>& m,
                                         std::span<const fusion::WindowRef<double>> w) {
  fusion::ForwardTrace<double> t;
  fusion::forward_logits<double>(m, w, &t);
  std::vector<Index> p;
  auto signs = [&p](const fusion::Matrix<double>& a) {
    for (Index i = 0; i < a.size(); ++i) p.push_back(a.data()[i] > 0.0);
  };
  for (const auto& sample : t.branches) {
    for (const auto& b : sample) {
      signs(b.act1);
      signs(b.act2);
      p.insert(p.end(), b.arg1.data(), b.arg1.data() + b.arg1.size());
      p.insert(p.end(), b.arg2.data(), b.arg2.data() + b.arg2.size());
    }
  }
  signs(t.hidden);
  return p;
}

/// Central differences against reverse mode for every parameter of a random
/// tiny network. Passes per parameter when |a - n| <= abs_floor or
/// |a - n| / max(|a|, |n|) <= rel_tol.
inline GradCheck grad_check(std::uint64_t seed, double h = 1e-5, double rel_tol = 1e-4,
                            double abs_floor = 1e-8, double lambda = 0.01) {
  const auto cfg = tiny_config();
  auto model = fusion::build_model<double>(cfg, seed);
  std::mt19937_64 rng(seed ^ 0xabcdefULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Nonzero biases so the check covers their gradients away from init.
  for (auto& g : model.groups()) {
    if (g.is_bias()) {
      for (Index i = 0; i < g.value.size(); ++i) g.value.data()[i] = 0.1 * normal(rng);
    }
  }
  constexpr int batch = 2;
  std::vector<fusion::Matrix<double>> data;
  std::vector<Index> labels;
  for (int s = 0; s < batch; ++s) {
    fusion::Matrix<double> x(cfg.window_len, 3);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    data.push_back(x);
    labels.push_back(static_cast<Index>(rng() % 3));
  }
  std::vector<fusion::WindowRef<double>> windows(data.begin(), data.end());
  const fusion::L2Config l2{lambda};
  const auto obj = fusion::objective_and_gradients<double>(model, windows, labels, l2);
  const auto base = switch_pattern(model, windows);

  GradCheck r;
  // A step that crosses a switch is retried with a smaller one.
  const double steps[] = {h, h / 10.0, h / 100.0};
  for (std::size_t gi = 0; gi < model.groups().size(); ++gi) {
    auto& value = model.groups()[gi].value;
    for (Index i = 0; i < value.size(); ++i) {
      const double orig = value.data()[i];
      double numeric = 0.0;
      bool smooth = false;
      for (double step : steps) {
        value.data()[i] = orig + step;
        const double fp = fusion::objective_value<double>(model, windows, labels, l2);
        const bool kink_p = switch_pattern(model, windows) != base;
        value.data()[i] = orig - step;
        const double fm = fusion::objective_value<double>(model, windows, labels, l2);
        const bool kink_m = switch_pattern(model, windows) != base;
        value.data()[i] = orig;
        if (!kink_p && !kink_m) {
          numeric = (fp - fm) / (2.0 * step);
          smooth = true;
          break;
        }
      }
      if (!smooth) {
        ++r.kinks;
        continue;
      }
      const double analytic = obj.grads[gi].data()[i];
      const double diff = std::abs(analytic - numeric);
      const double rel = diff / std::max({std::abs(analytic), std::abs(numeric), 1e-300});
      ++r.checked;
      r.max_abs = std::max(r.max_abs, diff);
      if (std::max(std::abs(analytic), std::abs(numeric)) > 1e-6) {
        r.max_rel_any = std::max(r.max_rel_any, rel);
      }
      if (diff > abs_floor) {
        r.max_rel = std::max(r.max_rel, rel);
        if (rel > rel_tol) ++r.failures;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Metrics brute force
// ---------------------------------------------------------------------------

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 0;
  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
};

struct BruteClass {
  Fraction precision, recall;
  std::int64_t support = 0;
};

/// Per-sample recount, no confusion matrix involved.
inline std::vector<BruteClass> brute_prf(const std::vector<Index>& pred,
                                         const std::vector<Index>& label, Index classes) {
  std::vector<BruteClass> out(static_cast<std::size_t>(classes));
  for (Index c = 0; c < classes; ++c) {
    auto& o = out[static_cast<std::size_t>(c)];
    for (std::size_t s = 0; s < pred.size(); ++s) {
      const bool p = pred[s] == c, t = label[s] == c;
      if (p && t) {
        ++o.precision.num;
        ++o.recall.num;
      }
      if (p) ++o.precision.den;
      if (t) ++o.recall.den;
    }
    o.support = o.recall.den;
  }
  return out;
}

/// Mann-Whitney statistic over all positive/negative pairs, ties counted 1/2.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// ---------------------------------------------------------------------------
// Segmentation brute force
// ---------------------------------------------------------------------------

/// Counts start offsets 0, S, 2S, ... whose window fits, one by one.
inline Index brute_window_count(Index length, Index window, Index stride) {
  Index n = 0;
  for (Index start = 0; start + window <= length; start += stride) ++n;
  return n;
}


// ---------------------------------------------------------------------------
// Synthetic data at desk scale
// ---------------------------------------------------------------------------

/// Low sample rate so a 512-sample window spans several defect periods.
inline fusion::SynthSpec desk_spec(double duration_s = 1.0) {
  fusion::SynthSpec s;
  s.sample_rate = 8000.0;
  s.duration_s = duration_s;
  return s;
}

inline fusion::OperatingCondition condition(double rpm, double torque = 0.7, double force = 1000.0,
                                            const std::string& name = "") {
  char buf[64];
  std::snprintf(buf, sizeof buf, "N%02ld_M%02ld_F%02ld", std::lround(rpm / 100.0),
                std::lround(torque * 10.0), std::lround(force / 100.0));
  return {rpm, torque, force, name.empty() ? std::string(buf) : name};
}

inline std::vector<fusion::Recording> desk_recordings(const fusion::OperatingCondition& oc,
                                                      int per_class, std::uint64_t seed,
                                                      double duration_s = 1.0) {
  return fusion::gen_recordings(
      {fusion::FaultClass::Healthy, fusion::FaultClass::InnerFault, fusion::FaultClass::OuterFault},
      {per_class, per_class, per_class}, oc, seed, desk_spec(duration_s));
}

}  // namespace support
