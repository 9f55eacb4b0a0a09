#include <doctest.h>

#include <map>
#include <random>

#include "fusion/model.hpp"
#include "fusion/network.hpp"
#include "fusion/transfer.hpp"

using namespace fusion;

namespace {

// Closed form, written independently of group_specs():
// per branch conv1 k*c1 + c1, conv2 k*c1*c2 + c2; head concat*d + d + d*C + C.
Index closed_form(Index w, Index c1 = 32, Index c2 = 64, Index k = 3, Index d = 100, Index classes = 3) {
  const Index p2 = ((w - k + 1) / 2 - k + 1) / 2;
  const Index concat = 3 * p2 * c2;
  return 3 * (k * c1 + c1 + k * c1 * c2 + c2) + concat * d + d + d * classes + classes;
}

}  // namespace

TEST_CASE("shape chain at window 10000") {
  const auto s = shape_chain(ArchitectureConfig{});
  CHECK(s.conv1_len == 9998);
  CHECK(s.pool1_len == 4999);
  CHECK(s.conv2_len == 4997);
  CHECK(s.pool2_len == 2498);
  CHECK(s.flatten_per_branch == 159872);
  CHECK(s.concat == 479616);
}

TEST_CASE("layer table lists every output shape") {
  const auto t = layer_table(ArchitectureConfig{});
  REQUIRE(t.size() == 21);
  auto find = [&t](const std::string& name) {
    for (const auto& row : t) {
      if (row.name == name) return row.shape;
    }
    FAIL("missing layer " << name);
    return std::vector<Index>{};
  };
  CHECK(find("conv1.vibration") == std::vector<Index>{9998, 32});
  CHECK(find("pool1.phase_current_1") == std::vector<Index>{4999, 32});
  CHECK(find("conv2.phase_current_2") == std::vector<Index>{4997, 64});
  CHECK(find("pool2.vibration") == std::vector<Index>{2498, 64});
  CHECK(find("flatten.vibration") == std::vector<Index>{159872});
  CHECK(find("concatenate") == std::vector<Index>{479616});
  CHECK(find("dense") == std::vector<Index>{100});
  CHECK(find("output") == std::vector<Index>{3});
}

TEST_CASE("parameter counts") {
  const ArchitectureConfig base;
  CHECK(parameter_count(base) == 47981011);
  CHECK(parameter_count(base) == closed_form(10000));
  ArchitectureConfig small;
  small.window_len = 512;
  CHECK(shape_chain(small).flatten_per_branch == 8064);
  CHECK(parameter_count(small) == 2438611);
  CHECK(parameter_count(small) == 384 + 18624 + (3 * 8064 * 100 + 100) + 303);

  const auto specs = group_specs(base);
  REQUIRE(specs.size() == kGroupCount);
  CHECK(specs[kDenseWeight].rows * specs[kDenseWeight].cols + specs[kDenseBias].rows == 47961700);
}

TEST_CASE("closed-form counts hold for random window lengths") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    ArchitectureConfig cfg;
    cfg.window_len = 12 + static_cast<Index>(rng() % 20000);
    CHECK(parameter_count(cfg) == closed_form(cfg.window_len));
  }
}

TEST_CASE("too-short window is a config error") {
  ArchitectureConfig cfg;
  cfg.window_len = 9;
  CHECK_THROWS_AS(shape_chain(cfg), ConfigError);
  cfg.window_len = 512;
  cfg.dense_units = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("trainable counts under each freeze mask at window 10000") {
  auto model = build_model<float>(ArchitectureConfig{}, 1);
  CHECK(count_trainable(model) == 47981011);
  apply_freeze(model, Strategy::Model1);
  CHECK(count_trainable(model) == 47962003);
  apply_freeze(model, Strategy::Model3);
  CHECK(count_trainable(model) == 47962003);
  apply_freeze(model, Strategy::Model2);
  CHECK(count_trainable(model) == 47980627);
  CHECK(count_parameters(model) - count_trainable(model) == 3 * 128);
}

TEST_CASE("glorot init is seeded per group and biases start at zero") {
  ArchitectureConfig cfg;
  cfg.window_len = 64;
  const auto a = build_model<float>(cfg, 9);
  const auto b = build_model<float>(cfg, 9);
  const auto c = build_model<float>(cfg, 10);
  for (int i = 0; i < kGroupCount; ++i) {
    CHECK(a.value(i) == b.value(i));
    const auto& g = a.group(i);
    if (g.is_bias()) {
      CHECK(g.value.isZero());
    } else {
      CHECK(a.value(i) != c.value(i));
      const double limit = std::sqrt(6.0 / static_cast<double>(g.spec.fan_in + g.spec.fan_out));
      CHECK(g.value.cwiseAbs().maxCoeff() <= limit);
      CHECK(glorot_uniform<float>(g.spec, i, 9) == a.value(i));
    }
  }
}

TEST_CASE("zero head gives uniform probabilities") {
  ArchitectureConfig cfg;
  cfg.window_len = 64;
  auto model = build_model<double>(cfg, 3);
  for (int i : {kOutputWeight, kOutputBias}) model.group(i).value.setZero();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Matrix<double> x(64, 3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  const auto p = forward(model, x);
  for (Index c = 0; c < 3; ++c) CHECK(p(c) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("probabilities sum to one and trace shapes match the table") {
  ArchitectureConfig cfg;
  cfg.window_len = 100;
  const auto model = build_model<float>(cfg, 4);
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n;
  std::vector<Matrix<float>> xs(5, Matrix<float>(100, 3));
  for (auto& x : xs) {
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  }
  std::vector<WindowRef<float>> refs(xs.begin(), xs.end());
  ForwardTrace<float> trace;
  const auto logits = forward_logits<float>(model, refs, &trace);
  const auto p = softmax_rows<float>(logits);
  for (Index r = 0; r < p.rows(); ++r) CHECK(p.row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));
  const auto table = layer_table(cfg);
  REQUIRE(trace.activation_shapes.size() == table.size());
  // The trace walks branch by branch; the table walks layer by layer.
  std::map<std::string, decltype(table[0].shape)> traced, listed;
  for (const auto& a : trace.activation_shapes) traced[a.name] = a.shape;
  for (const auto& l : table) listed[l.name] = l.shape;
  CHECK(traced.size() == table.size());
  CHECK(traced == listed);
}

TEST_CASE("forward rejects a mis-shaped window") {
  ArchitectureConfig cfg;
  cfg.window_len = 64;
  const auto model = build_model<float>(cfg, 1);
  CHECK_THROWS_AS(forward(model, Matrix<float>(Matrix<float>::Zero(63, 3))), ShapeError);
  CHECK_THROWS_AS(forward(model, Matrix<float>(Matrix<float>::Zero(64, 2))), ShapeError);
}

TEST_CASE("float and double forward agree") {
  ArchitectureConfig cfg;
  cfg.window_len = 128;
  const auto md = build_model<double>(cfg, 8);
  const auto mf = md.cast<float>();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Matrix<double> x(128, 3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  const auto pd = forward(md, x);
  const auto pf = forward(mf, Matrix<float>(x.cast<float>()));
  CHECK((pd - pf.cast<double>()).cwiseAbs().maxCoeff() < 1e-4);
}
