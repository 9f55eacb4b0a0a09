#include <doctest.h>

#include <numeric>

#include "fusion/transfer.hpp"
#include "support.hpp"

using namespace fusion;

namespace {

Checkpoint small_checkpoint(std::uint64_t seed = 11) {
  ArchitectureConfig cfg;
  cfg.window_len = 512;
  cfg.conv1_filters = 4;
  cfg.conv2_filters = 8;
  cfg.dense_units = 16;
  auto model = build_model<float>(cfg, seed);
  // Perturb biases so "unchanged" is not trivially zero.
  for (auto& g : model.groups()) {
    if (g.is_bias()) g.value.setConstant(0.01f);
  }
  return {TrainingMetadata{}, model};
}

PreparedData target_data() {
  PipelineConfig p;
  p.window_len = 512;
  p.stride = 256;
  p.validation_fraction = 0.2;
  p.test_fraction = 0.2;
  return prepare(support::desk_recordings(support::condition(900), 1, 5, 0.5), p);
}

}  // namespace

TEST_CASE("strategy names") {
  CHECK(parse_strategy("model1") == Strategy::Model1);
  CHECK(parse_strategy("Model2") == Strategy::Model2);
  CHECK(to_string(Strategy::Model3) == "model3");
  try {
    parse_strategy("model4");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.category() == "config");
  }
}

TEST_CASE("trainable counts for every window length follow the closed forms") {
  for (Index w : {64, 512, 1000, 10000}) {
    ArchitectureConfig cfg;
    cfg.window_len = w;
    const Checkpoint ckpt{{}, build_model<float>(cfg, 1)};
    const auto s = shape_chain(cfg);
    const Index head = s.concat * 100 + 100 + 100 * 3 + 3;
    CHECK(count_trainable(apply_strategy(ckpt, Strategy::Model1, 2)) == head);
    CHECK(count_trainable(apply_strategy(ckpt, Strategy::Model3, 2)) == head);
    CHECK(count_trainable(apply_strategy(ckpt, Strategy::Model2, 2)) == parameter_count(cfg) - 3 * 128);
  }
}

TEST_CASE("model3 redraws only the head, deterministically") {
  const auto ckpt = small_checkpoint();
  const auto m1 = apply_strategy(ckpt, Strategy::Model1, 9);
  const auto m3 = apply_strategy(ckpt, Strategy::Model3, 9);
  const auto m3b = apply_strategy(ckpt, Strategy::Model3, 9);
  auto other = ckpt;
  other.model.group(kDenseWeight).value.setConstant(5.0f);
  const auto m3c = apply_strategy(other, Strategy::Model3, 9);
  for (int i = 0; i < kGroupCount; ++i) {
    CHECK(m1.value(i) == ckpt.model.value(i));
    CHECK(m3.value(i) == m3b.value(i));
    CHECK(m3.group(i).trainable == m1.group(i).trainable);
    if (i < kDenseWeight) {
      CHECK(m3.value(i) == ckpt.model.value(i));
    } else {
      CHECK(m3c.value(i) == m3.value(i));
      if (!m3.group(i).is_bias()) CHECK(m3.value(i) != ckpt.model.value(i));
    }
  }
  CHECK(m3.group(kDenseBias).value.isZero());
}

TEST_CASE("architecture mismatch is rejected") {
  const auto ckpt = small_checkpoint();
  ArchitectureConfig other = ckpt.model.config();
  other.window_len = 1024;
  CHECK_THROWS_AS(apply_strategy(ckpt, Strategy::Model1, 1, other), ConfigError);
  CHECK_NOTHROW(apply_strategy(ckpt, Strategy::Model1, 1, ckpt.model.config()));
}

TEST_CASE("fine-tuning moves exactly the trainable groups") {
  const auto ckpt = small_checkpoint();
  const auto data = target_data();
  Hyperparams hp = fine_tune_defaults();
  hp.learning_rate = 1e-3;
  hp.epochs = 2;
  for (auto s : {Strategy::Model1, Strategy::Model2, Strategy::Model3}) {
    CAPTURE(to_string(s));
    auto model = apply_strategy(ckpt, s, 4);
    const auto start = model;
    const auto r = fine_tune(model, data.windows, data.plan, hp);
    CHECK(r.history.epochs.size() == 2);
    CHECK(r.report.trainable_params == count_trainable(start));
    CHECK(r.report.confusion.total() == static_cast<std::int64_t>(data.plan.test.size()));
    for (int i = 0; i < kGroupCount; ++i) {
      CAPTURE(i);
      const bool moved = model.value(i) != start.value(i);
      CHECK(moved == start.group(i).trainable);
    }
  }
}

TEST_CASE("cross-condition evaluation labels both conditions") {
  const auto ckpt = small_checkpoint();
  const auto data = target_data();
  const auto r = cross_condition_eval(ckpt, data.windows, data.plan.test, "N15_M07_F10", "N09_M07_F10");
  CHECK(r.source_condition == "N15_M07_F10");
  CHECK(r.target_condition == "N09_M07_F10");
  CHECK(r.confusion.total() == static_cast<std::int64_t>(data.plan.test.size()));
  const auto again = evaluate(ckpt.model, data.windows, data.plan.test);
  CHECK(again.accuracy == r.accuracy);
  CHECK(again.confusion == r.confusion);
}

TEST_CASE("standardizer survives checkpoint metadata") {
  Standardizer s;
  s.channels[0] = {1.0, 2.0};
  s.channels[2] = {-3.0, 0.5};
  TrainingMetadata meta;
  CHECK(!stored_standardizer(meta).has_value());
  store_standardizer(s, meta);
  const auto back = stored_standardizer(meta);
  REQUIRE(back.has_value());
  CHECK(back->channels[0].mean == 1.0);
  CHECK(back->channels[2].std == 0.5);
}
