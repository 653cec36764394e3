#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparseview/camera.h"
#include "sparseview/field.h"
#include "sparseview/image.h"
#include "sparseview/radiance.h"
#include "sparseview/rng.h"
#include "sparseview/tape.h"

namespace sparseview {

struct RenderConfig {
  int samples = 64;
  double near = 0.5;
  double far = 3.5;
  // Stratified jitter, seeded per ray from (seed, ray id).
  bool jitter = false;
  std::uint64_t seed = 0;
  Rgb background{0.0, 0.0, 0.0};
  std::size_t rays_per_chunk = 16;

  void validate() const;
};

struct SampleDepths {
  std::vector<double> depths;
  // deltas[i] = depths[i + 1] - depths[i]; the last spacing runs to `far`.
  std::vector<double> deltas;
};

// One draw per equal-width bin of [near, far]; bin midpoints without jitter.
SampleDepths stratified_sample(double near, double far, int count, Rng* jitter = nullptr);

struct CompositeWeights {
  std::vector<double> transmittance;  // T_i = exp(-sum_{j<i} sigma_j delta_j)
  std::vector<double> weights;        // w_i = T_i (1 - exp(-sigma_i delta_i))
  double final_transmittance = 1.0;   // T_{N+1}
};

// Rejects negative densities or non-positive spacings.
CompositeWeights compute_weights(std::span<const double> sigmas, std::span<const double> deltas);

// All samples of one ray.
struct RaySampleBatch {
  std::vector<double> depths;
  std::vector<double> deltas;
  std::vector<double> sigmas;
  std::vector<Rgb> colors;
  std::vector<double> transmittance;
  std::vector<double> weights;
  double final_transmittance = 1.0;
};

// Additive noise on the compositing weights: w_i + omega * eps_i, with one
// eps per sample shared across channels. omega = 0 leaves compositing
// untouched.
struct WeightPerturbSpec {
  double omega = 0.0;
  const NoiseSource* noise = nullptr;
  bool clamp = true;
};

// sum_i w'_i c_i + T_{N+1} * background, not clipped.
Rgb composite(const RaySampleBatch& batch, const Rgb& background,
              const WeightPerturbSpec* perturb = nullptr, std::uint64_t noise_key = 0);

// sigma' = max(0, sigma + u), u ~ Uniform(-amplitude, amplitude) per sample.
struct DensityNoiseSpec {
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

struct RenderAugment {
  WeightPerturbSpec weight;
  DensityNoiseSpec density;
};

struct RaySummary {
  double weight_sum = 0.0;
  double final_transmittance = 1.0;
  double expected_depth = 0.0;
};

struct RenderResult {
  ImageBuffer image;  // clipped to [0, 1]
  ImageBuffer raw;    // pre-clip composite
  std::vector<RaySummary> summary;
};

struct RayColors {
  std::vector<Rgb> colors;  // pre-clip
  std::vector<RaySummary> summary;
};

RayColors render_rays(const RadianceSource& source, std::span<const Ray> rays,
                      const RenderConfig& config, const RenderAugment& augment = {});

RenderResult render_image(const RadianceSource& source, const Camera& camera,
                          const RenderConfig& config, const RenderAugment& augment = {});

// Differentiable render of `rays` through the field. Returns pre-clip colors
// [R x 3]. Samples use the same seeding as render_rays.
Var record_rays(Tape& tape, const FieldParams& params, std::span<const Ray> rays,
                const RenderConfig& config, const FieldAugment& field_augment,
                const WeightPerturbSpec& weight_perturb, bool trainable = true);

// Key for the weight-noise stream of a ray; shared by both render paths.
std::uint64_t weight_noise_key(std::uint64_t ray_id);
std::uint64_t sample_key(std::uint64_t ray_id, int sample);

}  // namespace sparseview
