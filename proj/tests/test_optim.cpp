#include <doctest.h>

#include <vector>

#include "fusion/optim.hpp"

using namespace fusion;

namespace {

ParamGroup<double> group(GroupRole role, std::initializer_list<double> values, bool trainable = true) {
  Matrix<double> m(1, static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) m(0, i++) = v;
  GroupSpec spec{"g", role, Layer::Dense, -1, 1, m.cols(), m.cols(), 1};
  return {spec, m, trainable};
}

}  // namespace

TEST_CASE("l2 penalty and gradient by hand") {
  const std::vector<ParamGroup<double>> g{group(GroupRole::DenseWeight, {1, 2})};
  const L2Config cfg{0.01};
  CHECK(l2_penalty<double>(g, cfg) == doctest::Approx(0.05).epsilon(1e-15));
  const auto grad = l2_gradient(g[0], cfg);
  CHECK(grad(0, 0) == doctest::Approx(0.02));
  CHECK(grad(0, 1) == doctest::Approx(0.04));

  const std::vector<ParamGroup<double>> single{group(GroupRole::ConvKernel, {1})};
  CHECK(l2_gradient(single[0], cfg)(0, 0) == doctest::Approx(0.02));
}

TEST_CASE("l2 with zero lambda contributes nothing") {
  const std::vector<ParamGroup<double>> g{group(GroupRole::DenseWeight, {1, 2})};
  CHECK(l2_penalty<double>(g, L2Config{0.0}) == 0.0);
  CHECK(l2_gradient(g[0], L2Config{0.0}).isZero());
}

TEST_CASE("l2 ignores biases") {
  std::vector<ParamGroup<double>> g{group(GroupRole::DenseWeight, {1, 2}),
                                    group(GroupRole::DenseBias, {3}),
                                    group(GroupRole::ConvBias, {4})};
  const L2Config cfg{0.01};
  const double before = l2_penalty<double>(g, cfg);
  g[1].value(0, 0) = 100;
  g[2].value(0, 0) = -7;
  CHECK(l2_penalty<double>(g, cfg) == before);
  CHECK(l2_gradient(g[1], cfg).isZero());
  CHECK_THROWS_AS(validate(L2Config{-1.0}), ConfigError);
}

TEST_CASE("adam first step is bias corrected") {
  std::vector<ParamGroup<double>> g{group(GroupRole::DenseWeight, {0.5})};
  auto state = make_adam_state<double>(g);
  const Gradients<double> grads{Matrix<double>::Ones(1, 1)};
  adam_step<double>(g, grads, state, 0.001);
  CHECK(state.step == 1);
  const double delta = g[0].value(0, 0) - 0.5;
  CHECK(delta == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(delta == doctest::Approx(-0.000999999).epsilon(1e-6));
}

TEST_CASE("adam leaves parameters alone for zero gradient and frozen groups") {
  std::vector<ParamGroup<double>> g{group(GroupRole::DenseWeight, {0.25, -1}),
                                    group(GroupRole::ConvKernel, {3, 4}, false)};
  auto state = make_adam_state<double>(g);
  const auto frozen_before = g[1].value;
  Gradients<double> grads{Matrix<double>::Zero(1, 2), Matrix<double>::Ones(1, 2)};
  for (int i = 0; i < 3; ++i) adam_step<double>(g, grads, state, 0.01);
  CHECK(g[0].value(0, 0) == 0.25);
  CHECK(g[0].value(0, 1) == -1.0);
  CHECK(g[1].value == frozen_before);
}

TEST_CASE("adam rejects bad input") {
  std::vector<ParamGroup<double>> g{group(GroupRole::DenseWeight, {1})};
  auto state = make_adam_state<double>(g);
  const Gradients<double> grads{Matrix<double>::Ones(1, 1)};
  CHECK_THROWS_AS(adam_step<double>(g, grads, state, 0.0), ConfigError);
  const Gradients<double> wrong{Matrix<double>::Ones(2, 1)};
  CHECK_THROWS_AS(adam_step<double>(g, wrong, state, 0.001), ShapeError);
}

TEST_CASE("adam matches a scalar reference over many steps") {
  std::vector<ParamGroup<double>> g{group(GroupRole::DenseWeight, {0.3})};
  auto state = make_adam_state<double>(g);
  double p = 0.3, m = 0, v = 0;
  for (int t = 1; t <= 20; ++t) {
    const double grad = 0.1 * t - 1.0;
    adam_step<double>(g, Gradients<double>{Matrix<double>::Constant(1, 1, grad)}, state, 0.01);
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad * grad;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    p -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(g[0].value(0, 0) == doctest::Approx(p).epsilon(1e-12));
  }
}
