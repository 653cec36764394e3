#include <gtest/gtest.h>

#include <cmath>

#include "sparseview/field.h"
#include "sparseview/renderer.h"
#include "sparseview/rng.h"
#include "sparseview/tau_noise.h"
#include "test_util.h"

namespace sparseview {
namespace {

class ConstantField final : public RadianceSource {
 public:
  ConstantField(double sigma, Rgb rgb) : sigma_(sigma), rgb_(rgb) {}
  void evaluate(std::span<const double>, std::span<const double>, std::span<const std::uint64_t> keys,
                std::span<double> rgb, std::span<double> sigma) const override {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      sigma[i] = sigma_;
      for (int c = 0; c < 3; ++c) rgb[3 * i + c] = rgb_[c];
    }
  }

 private:
  double sigma_;
  Rgb rgb_;
};

TEST(StratifiedSampleTest, MidpointsWithoutJitter) {
  const SampleDepths d = stratified_sample(0.0, 1.0, 2);
  EXPECT_EQ(d.depths, (std::vector<double>{0.25, 0.75}));
}

TEST(StratifiedSampleTest, FarBoundSpacing) {
  const SampleDepths d = stratified_sample(0.0, 1.0, 4);
  ASSERT_EQ(d.deltas.size(), 4u);
  EXPECT_DOUBLE_EQ(d.deltas[0], 0.25);
  EXPECT_DOUBLE_EQ(d.deltas[1], 0.25);
  EXPECT_DOUBLE_EQ(d.deltas[2], 0.25);
  EXPECT_DOUBLE_EQ(d.deltas[3], 0.125);
}

TEST(StratifiedSampleTest, JitteredDepthsStayInTheirBins) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const SampleDepths d = stratified_sample(0.5, 3.5, 16, &rng);
    for (int i = 0; i < 16; ++i) {
      EXPECT_GE(d.depths[i], 0.5 + 3.0 * i / 16.0);
      EXPECT_LE(d.depths[i], 0.5 + 3.0 * (i + 1) / 16.0);
      EXPECT_GT(d.deltas[i], 0.0);
    }
  }
  EXPECT_THROW(stratified_sample(1.0, 1.0, 4), std::invalid_argument);
}

TEST(ComputeWeightsTest, EmptySpace) {
  const std::vector<double> s(5, 0.0), d(5, 0.2);
  const CompositeWeights w = compute_weights(s, d);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(w.weights[i], 0.0);
    EXPECT_EQ(w.transmittance[i], 1.0);
  }
  EXPECT_EQ(w.final_transmittance, 1.0);
}

TEST(ComputeWeightsTest, OpaqueLimit) {
  const std::vector<double> s{50.0}, d{1.0};
  EXPECT_NEAR(compute_weights(s, d).weights[0], 1.0, 1e-9);
}

TEST(ComputeWeightsTest, TwoSampleHandExample) {
  const std::vector<double> s{1, 1}, d{1, 1};
  const CompositeWeights w = compute_weights(s, d);
  EXPECT_EQ(w.transmittance[0], 1.0);
  EXPECT_NEAR(w.transmittance[1], std::exp(-1.0), 1e-15);
  EXPECT_NEAR(w.weights[0], 0.632121, 1e-6);
  EXPECT_NEAR(w.weights[1], 0.232544, 1e-6);
}

TEST(ComputeWeightsTest, MatchesDirectProductAndConservesMass) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(64));
    std::vector<double> s(n), d(n);
    for (int i = 0; i < n; ++i) {
      s[i] = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0, 20);
      d[i] = rng.uniform(1e-3, 0.2);
    }
    const CompositeWeights w = compute_weights(s, d);
    double total = w.final_transmittance;
    for (int i = 0; i < n; ++i) {
      double direct = 1.0;
      for (int j = 0; j < i; ++j) direct *= std::exp(-s[j] * d[j]);
      EXPECT_NEAR(w.transmittance[i], direct, 1e-12);
      total += w.weights[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(ComputeWeightsTest, RejectsInvalidInput) {
  EXPECT_THROW(compute_weights(std::vector<double>{-1}, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(compute_weights(std::vector<double>{1}, std::vector<double>{0}), std::invalid_argument);
  EXPECT_THROW(compute_weights(std::vector<double>{1, 2}, std::vector<double>{1}), std::invalid_argument);
}

RaySampleBatch two_sample_batch() {
  RaySampleBatch b;
  b.weights = {0.632121, 0.232544};
  b.colors = {Rgb{1, 0, 0}, Rgb{0, 1, 0}};
  b.final_transmittance = 0.0;
  return b;
}

TEST(CompositeTest, HandExample) {
  const Rgb c = composite(two_sample_batch(), {0, 0, 0});
  EXPECT_NEAR(c[0], 0.632121, 1e-12);
  EXPECT_NEAR(c[1], 0.232544, 1e-12);
  EXPECT_EQ(c[2], 0.0);
}

TEST(CompositeTest, ZeroOmegaIsBitExact) {
  const TauNoiseStream noise(TauNoiseSampler(3.0), 1);
  const WeightPerturbSpec spec{0.0, &noise, true};
  EXPECT_EQ(composite(two_sample_batch(), {0.2, 0.3, 0.4}, &spec, 7),
            composite(two_sample_batch(), {0.2, 0.3, 0.4}));
  const WeightPerturbSpec noisy{0.05, &noise, true};
  EXPECT_NE(composite(two_sample_batch(), {0, 0, 0}, &noisy, 7), composite(two_sample_batch(), {0, 0, 0}));
}

TEST(CompositeTest, PartitionOfUnity) {
  RaySampleBatch b;
  b.weights = {0.2, 0.3, 0.5};
  b.colors.assign(3, Rgb{0.3, 0.6, 0.9});
  b.final_transmittance = 0.0;
  const Rgb c = composite(b, {1, 1, 1});
  EXPECT_NEAR(c[0], 0.3, 1e-15);
  EXPECT_NEAR(c[1], 0.6, 1e-15);
  EXPECT_NEAR(c[2], 0.9, 1e-15);
}

TEST(RenderImageTest, ConstantFieldGivesUniformColor) {
  const ConstantField field(1e4, {0.2, 0.5, 0.7});
  RenderConfig cfg;
  cfg.samples = 16;
  const RenderResult r = render_image(field, testing::small_camera(6), cfg);
  for (std::size_t i = 0; i < r.image.pixel_count(); ++i) {
    const Rgb c = r.image.pixel(i);
    EXPECT_NEAR(c[0], 0.2, 1e-12);
    EXPECT_NEAR(c[1], 0.5, 1e-12);
    EXPECT_NEAR(c[2], 0.7, 1e-12);
  }
}

TEST(RenderImageTest, EmptyFieldShowsBackground) {
  const ConstantField field(0.0, {1, 0, 0});
  RenderConfig cfg;
  cfg.samples = 8;
  cfg.background = {0.1, 0.9, 0.3};
  const RenderResult r = render_image(field, testing::small_camera(5), cfg);
  for (std::size_t i = 0; i < r.image.pixel_count(); ++i) {
    EXPECT_EQ(r.image.pixel(i), cfg.background);
    EXPECT_EQ(r.summary[i].final_transmittance, 1.0);
  }
}

FieldParams tiny_model() {
  FieldArchitecture arch;
  arch.trunk_layers = 2;
  arch.trunk_width = 16;
  arch.position_frequencies = 3;
  arch.direction_frequencies = 1;
  return FieldParams::initialize(arch, 4);
}

TEST(RenderImageTest, SeededJitterIsDeterministic) {
  const FieldParams m = tiny_model();
  RenderConfig cfg;
  cfg.samples = 16;
  cfg.jitter = true;
  cfg.seed = 77;
  const Camera cam = testing::small_camera(8);
  const RenderResult a = render_image(FieldSource(m), cam, cfg);
  const RenderResult b = render_image(FieldSource(m), cam, cfg);
  EXPECT_EQ(a.raw, b.raw);
  cfg.seed = 78;
  EXPECT_NE(render_image(FieldSource(m), cam, cfg).raw, a.raw);
}

TEST(RenderImageTest, ChunkSizeDoesNotChangeOutput) {
  const FieldParams m = tiny_model();
  RenderConfig cfg;
  cfg.samples = 12;
  cfg.jitter = true;
  const Camera cam = testing::small_camera(7);
  cfg.rays_per_chunk = 1;
  const RenderResult a = render_image(FieldSource(m), cam, cfg);
  cfg.rays_per_chunk = 100;
  EXPECT_EQ(render_image(FieldSource(m), cam, cfg).raw, a.raw);
}

TEST(RecordRaysTest, MatchesForwardRenderer) {
  const FieldParams m = tiny_model();
  RenderConfig cfg;
  cfg.samples = 16;
  cfg.jitter = true;
  cfg.seed = 3;
  cfg.background = {0.2, 0.1, 0.0};
  const auto rays = generate_rays(testing::small_camera(5));
  const RayColors fwd = render_rays(FieldSource(m), rays, cfg);
  Tape tape;
  const NumericArray& rec = tape.value(record_rays(tape, m, rays, cfg, {}, {}));
  ASSERT_EQ(rec.rows(), rays.size());
  for (std::size_t r = 0; r < rays.size(); ++r) {
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(rec(r, c), fwd.colors[r][c], 1e-12);
  }
}

TEST(RecordRaysTest, WeightPerturbationMatchesForwardRenderer) {
  const FieldParams m = tiny_model();
  const TauNoiseStream noise(TauNoiseSampler(3.0), 12);
  RenderConfig cfg;
  cfg.samples = 8;
  const auto rays = generate_rays(testing::small_camera(4));
  RenderAugment aug;
  aug.weight = WeightPerturbSpec{0.05, &noise, true};
  const RayColors fwd = render_rays(FieldSource(m), rays, cfg, aug);
  const RayColors plain = render_rays(FieldSource(m), rays, cfg);
  Tape tape;
  const NumericArray& rec = tape.value(record_rays(tape, m, rays, cfg, {}, aug.weight));
  bool differs = false;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(rec(r, c), fwd.colors[r][c], 1e-12);
      differs |= fwd.colors[r][c] != plain.colors[r][c];
    }
  }
  EXPECT_TRUE(differs);
}

TEST(DensityNoiseTest, ZeroAmplitudeIsIdentityAndNoiseDegradesEmptyScene) {
  const ConstantField empty(0.0, {1, 1, 1});
  RenderConfig cfg;
  cfg.samples = 32;
  const Camera cam = testing::small_camera(6);
  const RenderResult clean = render_image(empty, cam, cfg);
  RenderAugment aug;
  aug.density = DensityNoiseSpec{0.0, 5};
  EXPECT_EQ(render_image(empty, cam, cfg, aug).raw, clean.raw);
  aug.density.amplitude = 2.0;
  const RenderResult noisy = render_image(empty, cam, cfg, aug);
  EXPECT_NE(noisy.raw, clean.raw);
  for (double v : noisy.image.values()) EXPECT_GE(v, 0.0);
  EXPECT_THROW(render_image(empty, cam, cfg, RenderAugment{{}, {-1.0, 0}}), std::invalid_argument);
}

}  // namespace
}  // namespace sparseview
