#include <gtest/gtest.h>

#include "sparseview/camera.h"
#include "sparseview/field.h"
#include "sparseview/gradcheck.h"
#include "sparseview/renderer.h"
#include "sparseview/rng.h"
#include "test_util.h"

namespace sparseview {
namespace {

NumericArray random_array(std::vector<std::size_t> shape, Rng& rng, double scale) {
  NumericArray a(std::move(shape));
  for (double& v : a.values()) v = rng.uniform(-scale, scale);
  return a;
}

TEST(GradcheckTest, QuadraticIsExact) {
  ParameterStore params;
  params.add("w", NumericArray::vector({0.7}));
  const Objective f = [](Tape& tape, const ParameterStore& p) {
    const Var w = tape.parameter("w", p.at("w"));
    return sum(tape, multiply(tape, w, w));
  };
  EXPECT_LT(finite_difference_check(f, params, 1e-5).max_relative_error, 1e-9);
}

TEST(GradcheckTest, ConstantObjectiveHasZeroError) {
  ParameterStore params;
  params.add("w", NumericArray::vector({1, 2, 3}));
  const Objective f = [](Tape& tape, const ParameterStore&) {
    return sum(tape, tape.constant(NumericArray::vector({4, 5})));
  };
  const GradientCheckResult r = finite_difference_check(f, params, 1e-5);
  EXPECT_EQ(r.max_relative_error, 0.0);
  EXPECT_EQ(r.analytic, 0.0);
  EXPECT_EQ(r.numeric, 0.0);
}

TEST(GradcheckTest, LinearSumGradientIsAllOnes) {
  Tape tape;
  ParameterStore params;
  params.add("W", NumericArray::matrix(2, 2, {0.3, -0.1, 0.8, 0.2}));
  params.add("b", NumericArray::vector({0, 0}));
  const Var x = tape.constant(NumericArray::vector({1, 1}));
  const Var y = affine(tape, x, tape.parameter("W", params.at("W")), tape.parameter("b", params.at("b")));
  const GradientSet g = tape.backward(sum(tape, y), params);
  for (double v : g.at("W").values()) EXPECT_EQ(v, 1.0);
}

TEST(GradcheckTest, RandomThreeLayerMlp) {
  // 4 -> 8 -> 6 -> 3 with 40 + 54 + 21 = 115 weights plus a 3x4 batch ~ 128 values.
  Rng rng(17);
  ParameterStore params;
  params.add("l0.weight", random_array({8, 4}, rng, 0.8));
  params.add("l0.bias", random_array({8}, rng, 0.2));
  params.add("l1.weight", random_array({6, 8}, rng, 0.8));
  params.add("l1.bias", random_array({6}, rng, 0.2));
  params.add("l2.weight", random_array({3, 6}, rng, 0.8));
  params.add("l2.bias", random_array({3}, rng, 0.2));
  const NumericArray input = random_array({3, 4}, rng, 1.0);
  const NumericArray target = random_array({3, 3}, rng, 1.0);
  const Objective f = [&](Tape& tape, const ParameterStore& p) {
    Var h = tape.constant(input);
    const Activation acts[] = {Activation::kSoftplus, Activation::kSigmoid, Activation::kExp};
    for (int l = 0; l < 3; ++l) {
      const std::string name = "l" + std::to_string(l);
      h = activate(tape,
                   affine(tape, h, tape.parameter(name + ".weight", p.at(name + ".weight")),
                          tape.parameter(name + ".bias", p.at(name + ".bias"))),
                   acts[l]);
    }
    return weighted_squared_error(tape, h, target, {1.0, 0.5, 2.0}, 1.0 / 9.0);
  };
  const GradientCheckResult r = finite_difference_check(f, params, 1e-5);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "]";
}

TEST(GradcheckTest, RenderAndMseOnTinyImage) {
  FieldArchitecture arch;
  arch.trunk_layers = 2;
  arch.trunk_width = 8;
  arch.position_frequencies = 2;
  arch.direction_frequencies = 1;
  const FieldParams model = FieldParams::initialize(arch, 5);
  const Camera cam = testing::small_camera(4);
  const std::vector<Ray> rays = generate_rays(cam);
  RenderConfig render;
  render.samples = 2;
  NumericArray target({rays.size(), 3});
  Rng rng(3);
  for (double& v : target.values()) v = rng.uniform();
  const Objective f = [&](Tape& tape, const ParameterStore& p) {
    const FieldParams current(arch, p);
    const Var colors = record_rays(tape, current, rays, render, {}, {});
    return weighted_squared_error(tape, colors, target, std::vector<double>(rays.size(), 1.0),
                                  1.0 / (3.0 * rays.size()));
  };
  const GradientCheckResult r = finite_difference_check(f, model.store(), 1e-5);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "]";
}

TEST(GradcheckTest, NondeterministicObjectiveRejected) {
  ParameterStore params;
  params.add("w", NumericArray::vector({1}));
  int calls = 0;
  const Objective f = [&](Tape& tape, const ParameterStore& p) {
    const Var w = tape.parameter("w", p.at("w"));
    const Var c = tape.constant(NumericArray::vector({static_cast<double>(++calls)}));
    return sum(tape, multiply(tape, w, c));
  };
  EXPECT_THROW(finite_difference_check(f, params, 1e-5), std::logic_error);
}

}  // namespace
}  // namespace sparseview
