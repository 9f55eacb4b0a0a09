#include "fusion/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "fusion/json_io.hpp"

namespace fusion {

void validate(const SynthSpec& spec) {
  if (!(spec.duration_s > 0)) throw ConfigError("synth: duration must be > 0");
  if (!(spec.sample_rate > 0)) throw ConfigError("synth: sample_rate must be > 0");
  const double n = spec.duration_s * spec.sample_rate;
  if (std::abs(n - std::round(n)) > 1e-6) {
    throw ConfigError("synth: duration * sample_rate must be a whole number of samples");
  }
  if (spec.inner_multiplier == spec.outer_multiplier) {
    throw ConfigError("synth: inner and outer defect multipliers must differ");
  }
  if (spec.noise_std < 0 || spec.current_noise_std < 0) throw ConfigError("synth: negative noise");
  validate(spec.condition);
}

Index sample_count(const SynthSpec& spec) {
  return static_cast<Index>(std::llround(spec.duration_s * spec.sample_rate));
}

double defect_frequency(const SynthSpec& spec) {
  const double shaft_hz = spec.condition.rotational_speed / 60.0;
  switch (spec.label) {
    case FaultClass::InnerFault: return shaft_hz * spec.inner_multiplier;
    case FaultClass::OuterFault: return shaft_hz * spec.outer_multiplier;
    case FaultClass::Healthy: break;
  }
  return 0.0;
}

SynthComponents generate_components(const SynthSpec& spec) {
  validate(spec);
  const Index n = sample_count(spec);
  const double dt = 1.0 / spec.sample_rate;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  SynthComponents out;

  // Noise stream depends on the seed only.
  {
    std::mt19937_64 rng(mix_seed(spec.seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    out.noise.resize(n, 3);
    const double scale[3] = {spec.current_noise_std, spec.current_noise_std, spec.noise_std};
    for (Index c = 0; c < 3; ++c) {
      for (Index i = 0; i < n; ++i) out.noise(i, c) = static_cast<float>(scale[c] * normal(rng));
    }
  }

  const double fault_hz = defect_frequency(spec);
  out.impulses = Eigen::VectorXf::Zero(n);
  if (fault_hz > 0) {
    std::mt19937_64 rng(mix_seed(spec.seed, 2));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double period = 1.0 / fault_hz;
    const double amplitude = spec.impulse_amplitude * spec.condition.radial_force / 1000.0;
    const double ring = 10.0 / spec.decay_per_s;  // envelope below e^-10 afterwards
    const double t_end = static_cast<double>(n) * dt;
    double nominal = unit(rng) * period;
    while (nominal < t_end) {
      const double t0 = nominal + (unit(rng) - 0.5) * 2.0 * spec.timing_jitter * period;
      nominal += period;
      if (t0 < 0 || t0 >= t_end) continue;
      out.burst_times.push_back(t0);
      const auto first = static_cast<Index>(std::ceil(t0 / dt));
      const auto last = std::min<Index>(n - 1, static_cast<Index>((t0 + ring) / dt));
      for (Index i = first; i <= last; ++i) {
        const double tau = static_cast<double>(i) * dt - t0;
        out.impulses(i) += static_cast<float>(amplitude * std::exp(-spec.decay_per_s * tau) *
                                              std::sin(two_pi * spec.resonance_hz * tau));
      }
    }
  }

  {
    std::mt19937_64 rng(mix_seed(spec.seed, 3));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double phase0 = two_pi * unit(rng);
    const double supply_hz = spec.condition.rotational_speed / 60.0 * spec.pole_pairs;
    const double amplitude = spec.current_amplitude * spec.condition.load_torque / 0.7;
    const double depth = spec.label == FaultClass::InnerFault   ? spec.inner_sideband_depth
                         : spec.label == FaultClass::OuterFault ? spec.outer_sideband_depth
                                                                : 0.0;
    out.currents.resize(n, 2);
    for (Index i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      const double envelope = amplitude * (1.0 + depth * std::sin(two_pi * fault_hz * t));
      const double arg = two_pi * supply_hz * t + phase0;
      out.currents(i, 0) = static_cast<float>(envelope * std::sin(arg));
      out.currents(i, 1) = static_cast<float>(envelope * std::sin(arg + spec.phase_offset_rad));
    }
  }
  return out;
}

Recording gen_recording(const SynthSpec& spec) {
  auto parts = generate_components(spec);
  Recording rec;
  rec.id = spec.id;
  rec.label = spec.label;
  rec.condition = spec.condition;
  rec.sample_rate = spec.sample_rate;
  rec.samples = parts.noise;
  rec.samples.leftCols(2) += parts.currents;
  rec.samples.col(2) += parts.impulses;
  return rec;
}

std::vector<Recording> gen_recordings(const std::vector<FaultClass>& classes,
                                      const std::vector<int>& counts,
                                      const OperatingCondition& condition, std::uint64_t seed,
                                      const SynthSpec& base) {
  if (classes.empty()) throw ConfigError("synth: class list is empty");
  if (classes.size() != counts.size()) throw ConfigError("synth: one count per class required");
  for (int c : counts) {
    if (c < 1) throw ConfigError("synth: every class count must be >= 1");
  }
  std::vector<Recording> out;
  std::uint64_t serial = 0;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    for (int r = 0; r < counts[k]; ++r, ++serial) {
      SynthSpec spec = base;
      spec.label = classes[k];
      spec.condition = condition;
      spec.seed = mix_seed(seed, serial + 1);
      char id[96];
      std::snprintf(id, sizeof id, "%s_%s_%03d", condition.name.c_str(),
                    to_string(classes[k]).c_str(), r);
      spec.id = id;
      out.push_back(gen_recording(spec));
    }
  }
  return out;
}

namespace {

Json condition_json(const OperatingCondition& oc) {
  return Json{{"rpm", oc.rotational_speed}, {"Nm", oc.load_torque}, {"N", oc.radial_force},
              {"name", oc.name}};
}

}  // namespace

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  Json entries = Json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"path", e.path}, {"id", e.id}, {"label", to_string(e.label)}});
  }
  const Json j{{"condition", condition_json(m.condition)}, {"seed", m.seed}, {"recordings", entries}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest: " + path.string());
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  Manifest m;
  try {
    const Json j = Json::parse(in);
    const auto& oc = j.at("condition");
    m.condition = {oc.at("rpm").get<double>(), oc.at("Nm").get<double>(), oc.at("N").get<double>(),
                   oc.at("name").get<std::string>()};
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& e : j.at("recordings")) {
      m.entries.push_back({e.at("path").get<std::string>(), e.at("id").get<std::string>(),
                           parse_fault_class(e.at("label").get<std::string>())});
    }
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

std::vector<Recording> load_manifest_recordings(const std::filesystem::path& path) {
  const Manifest m = load_manifest(path);
  std::vector<Recording> out;
  for (const auto& e : m.entries) {
    auto rec = load_recording(path.parent_path() / e.path);
    if (rec.label != e.label) {
      throw DataError("manifest label for " + e.id + " disagrees with the recording header");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Manifest gen_dataset(const std::vector<FaultClass>& classes, const std::vector<int>& counts,
                     const OperatingCondition& condition, std::uint64_t seed,
                     const std::filesystem::path& dir, const SynthSpec& base) {
  auto recordings = gen_recordings(classes, counts, condition, seed, base);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  Manifest m{condition, seed, {}};
  for (const auto& rec : recordings) {
    const std::string file = rec.id + ".rec";
    save_recording(rec, dir / file);
    m.entries.push_back({file, rec.id, rec.label});
  }
  save_manifest(m, dir / "manifest.json");
  return m;
}

}  // namespace fusion
