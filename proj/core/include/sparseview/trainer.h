#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparseview/adam.h"
#include "sparseview/augment.h"
#include "sparseview/camera.h"
#include "sparseview/confidence.h"
#include "sparseview/field.h"
#include "sparseview/image.h"
#include "sparseview/renderer.h"
#include "sparseview/rng.h"
#include "sparseview/tape.h"

namespace sparseview {

enum class Supervision { kReal, kPseudo };

// Rays with one supervision color each.
struct TrainBatch {
  Supervision tag = Supervision::kReal;
  std::vector<Ray> rays;
  std::vector<Rgb> targets;

  void validate() const;
};

// A square patch of a novel view rendered as a whole; only `labeled` entries
// (indices into `pixels`, ascending) carry pseudo labels.
struct PseudoPatch {
  Camera camera;
  int side = 0;
  std::vector<Pixel> pixels;  // side * side, row-major
  std::vector<std::size_t> labeled;
  std::vector<Rgb> targets;  // parallel to labeled
};

struct LossConfig {
  // Weight of the pseudo term; the real term gets 1 - mix.
  double mix = 0.5;

  void validate() const;
};

struct TrainingViews {
  std::vector<Camera> cameras;
  std::vector<ImageBuffer> images;

  void validate() const;
};

// Gives every ray a fresh identity derived from (salt, old id) so per-ray
// random streams differ from step to step.
void salt_ray_ids(std::span<Ray> rays, std::uint64_t salt);

// `count` rays drawn uniformly (with replacement) over all training pixels.
TrainBatch sample_real_batch(const TrainingViews& views, std::size_t count, Rng& rng);

// Mean squared error over rays and channels, one gradient step on `model`.
// Gradients are accumulated per chunk of render.rays_per_chunk rays and summed
// in chunk order.
double pretrain_step(FieldParams& model, Adam& optimizer, const TrainBatch& batch,
                     const RenderConfig& render);

// Loss and gradient without the update.
struct LossAndGradient {
  double loss = 0.0;
  GradientSet gradient;
};
LossAndGradient real_loss_gradient(const FieldParams& model, const TrainBatch& batch,
                                   const RenderConfig& render, const FieldAugment& field_augment,
                                   const WeightPerturbSpec& weight_perturb, double scale);

// Pose between two distinct random training cameras, factor uniform in
// [t_lo, t_hi].
Camera sample_novel_pose(std::span<const Camera> cameras, Rng& rng, double t_lo = 0.2,
                         double t_hi = 0.8);

// Patch of spec.side placed uniformly among the corners whose patch contains
// a randomly chosen selected pixel; labels are the selected pixels inside it.
PseudoPatch make_pseudo_patch(const PseudoLabelSet& labels, const PatchSpec& spec, Rng& rng);

// Masked pseudo loss on a rendered patch [side^2 x 3]: the patch is dilated
// with `window` (1 disables it), then
//   scale * sum_{labeled k} |dilated[k] - target[k]|^2.
// Unlabeled pixels of the dilated output receive exactly zero gradient.
Var pseudo_patch_loss(Tape& tape, Var patch_colors, const PseudoPatch& patch, int window,
                      double scale);

struct AugmentWeights {
  double weight_perturb = 0.0;  // omega for compositing weights
  double layer_noise = 0.0;     // omega for head-input features
};

struct StudentConfig {
  RenderConfig render;
  LossConfig loss;
  PatchSpec patch;
  std::vector<std::string> noise_targets{"head.rgb", "head.sigma"};
  double tau_bound = 3.0;
  bool clamp_weights = true;
  // Seed for the tau-noise streams; combined with per-step ray ids.
  std::uint64_t noise_seed = 0;
};

struct StudentStepResult {
  double loss = 0.0;
  double pseudo_loss = 0.0;  // unweighted mean over labeled pixels and channels
  double real_loss = 0.0;    // unweighted mean over rays and channels
};

struct TrainState {
  FieldParams teacher;
  FieldParams student;
  Adam optimizer;
  std::int64_t step = 0;
  NoiseSchedule weight_schedule;
  NoiseSchedule layer_schedule;
  std::uint64_t seed = 0;
  double momentum = 0.99;

  // Both branches start from the pretrained weights.
  static TrainState from_pretrained(const FieldParams& pretrained, const AdamConfig& adam,
                                    NoiseSchedule weight_schedule, NoiseSchedule layer_schedule,
                                    std::uint64_t seed, double momentum);
  AugmentWeights augment_weights() const;
};

// One student update. Pseudo pixels must belong to `selection`. With
// loss.mix = 0 the pseudo patch is ignored. The teacher is not touched.
StudentStepResult student_step(TrainState& state, const PseudoPatch* pseudo,
                               const PseudoLabelSet* selection, const TrainBatch& real,
                               const StudentConfig& config, const AugmentWeights& weights);

struct SemiSupervisedConfig {
  StudentConfig student;
  EnsembleConfig ensemble;
  HsvThresholds hsv;
  double kappa = 0.10;
  double low_contrast_share = 0.5;
  int refresh_period = 50;
  std::size_t real_rays = 64;
  std::int64_t steps = 500;

  void validate() const;
};

// Builds a PseudoLabelSet from the teacher at `camera`.
PseudoLabelSet teacher_pseudo_labels(const FieldParams& teacher, const Camera& camera,
                                     const SemiSupervisedConfig& config);

struct StepReport {
  std::int64_t step = 0;
  StudentStepResult result;
  AugmentWeights weights;
  bool refreshed = false;
  std::size_t selected = 0;  // size of the current pseudo-label set
};

using StepObserver = std::function<void(const StepReport&, const TrainState&)>;

// Runs config.steps iterations: refresh pseudo labels every refresh_period
// steps, one student step, then the EMA update of the teacher.
void run_semi_supervised(TrainState& state, const TrainingViews& views,
                         const SemiSupervisedConfig& config, const StepObserver& observer = {});

}  // namespace sparseview
