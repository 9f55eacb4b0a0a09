#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fusion/synth.hpp"

using namespace fusion;
namespace fs = std::filesystem;

namespace {

// Onsets where |x| first exceeds `threshold` after at least `gap` quiet samples.
int count_onsets(const Eigen::VectorXf& x, float threshold, Index gap) {
  int n = 0;
  Index last = -gap - 1;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > threshold) {
      if (i - last > gap) ++n;
      last = i;
    }
  }
  return n;
}

double excess_kurtosis(const Eigen::VectorXf& x) {
  const Eigen::VectorXd d = x.cast<double>();
  const double mean = d.mean();
  const Eigen::ArrayXd c = d.array() - mean;
  const double m2 = c.square().mean();
  const double m4 = c.square().square().mean();
  return m4 / (m2 * m2) - 3.0;
}

}  // namespace

TEST_CASE("same spec and seed give identical recordings") {
  SynthSpec s;
  s.label = FaultClass::InnerFault;
  s.seed = 12;
  s.duration_s = 0.5;
  const auto a = gen_recording(s);
  const auto b = gen_recording(s);
  CHECK(a.samples == b.samples);
  s.seed = 13;
  CHECK(gen_recording(s).samples != a.samples);
}

TEST_CASE("inner fault bursts at 135 per second at 1500 rpm") {
  SynthSpec s;
  s.label = FaultClass::InnerFault;
  s.noise_std = 0.0;
  s.seed = 5;
  CHECK(defect_frequency(s) == doctest::Approx(135.0));
  const auto rec = gen_recording(s);
  const Eigen::VectorXf vib = rec.samples.col(2);
  const auto gap = static_cast<Index>(0.003 * s.sample_rate);
  const int bursts = count_onsets(vib, 0.3f * static_cast<float>(s.impulse_amplitude), gap);
  const double rate = bursts / s.duration_s;
  CHECK(rate == doctest::Approx(135.0).epsilon(0.01));

  s.label = FaultClass::OuterFault;
  const auto outer = gen_recording(s);
  const int outer_bursts =
      count_onsets(outer.samples.col(2), 0.3f * static_cast<float>(s.impulse_amplitude), gap);
  CHECK(outer_bursts / s.duration_s == doctest::Approx(90.0).epsilon(0.015));
}

TEST_CASE("healthy vibration is Gaussian") {
  SynthSpec s;
  s.seed = 21;
  const auto rec = gen_recording(s);
  REQUIRE(rec.samples.rows() >= 64000);
  CHECK(std::abs(excess_kurtosis(rec.samples.col(2))) < 0.5);

  s.label = FaultClass::OuterFault;
  CHECK(excess_kurtosis(gen_recording(s).samples.col(2)) > 1.0);
}

TEST_CASE("changing rpm moves bursts but not noise") {
  SynthSpec a;
  a.label = FaultClass::OuterFault;
  a.seed = 99;
  a.duration_s = 1.0;
  SynthSpec b = a;
  b.condition.rotational_speed = 900;
  const auto pa = generate_components(a);
  const auto pb = generate_components(b);
  CHECK(pa.noise == pb.noise);
  REQUIRE(pa.burst_times.size() > 2);
  REQUIRE(pb.burst_times.size() > 2);
  const double spacing_a = (pa.burst_times.back() - pa.burst_times.front()) /
                           static_cast<double>(pa.burst_times.size() - 1);
  const double spacing_b = (pb.burst_times.back() - pb.burst_times.front()) /
                           static_cast<double>(pb.burst_times.size() - 1);
  CHECK(spacing_a == doctest::Approx(1.0 / 90.0).epsilon(0.02));
  CHECK(spacing_b == doctest::Approx(1.0 / 54.0).epsilon(0.02));
}

TEST_CASE("amplitude scales with force and current with torque") {
  SynthSpec a;
  a.label = FaultClass::InnerFault;
  a.seed = 3;
  a.duration_s = 0.25;
  SynthSpec b = a;
  b.condition.radial_force = 400;
  b.condition.load_torque = 0.1;
  const auto pa = generate_components(a);
  const auto pb = generate_components(b);
  CHECK(pb.impulses.cwiseAbs().maxCoeff() ==
        doctest::Approx(0.4 * pa.impulses.cwiseAbs().maxCoeff()).epsilon(1e-4));
  CHECK(pb.currents.cwiseAbs().maxCoeff() ==
        doctest::Approx(pa.currents.cwiseAbs().maxCoeff() / 7.0).epsilon(1e-4));
}

TEST_CASE("dataset manifest") {
  const auto dir = fs::temp_directory_path() / "fusion_tests" / "synth_manifest";
  fs::remove_all(dir);
  SynthSpec base;
  base.duration_s = 0.01;
  base.sample_rate = 8000;
  const auto m = gen_dataset({FaultClass::Healthy, FaultClass::InnerFault, FaultClass::OuterFault},
                             {6, 11, 12}, OperatingCondition{}, 4, dir, base);
  CHECK(m.entries.size() == 29);
  const auto loaded = load_manifest(dir / "manifest.json");
  CHECK(loaded.entries.size() == 29);
  const auto recs = load_manifest_recordings(dir / "manifest.json");
  REQUIRE(recs.size() == 29);
  CHECK(recs[28].label == FaultClass::OuterFault);
  CHECK(recs[0].samples.rows() == 80);
  CHECK_THROWS_AS(gen_recordings({}, {}, OperatingCondition{}, 1), ConfigError);
}

TEST_CASE("synth spec validation") {
  SynthSpec s;
  s.duration_s = 0;
  CHECK_THROWS_AS(validate(s), ConfigError);
  s = SynthSpec{};
  s.condition.rotational_speed = -1;
  CHECK_THROWS_AS(validate(s), DataError);
}
