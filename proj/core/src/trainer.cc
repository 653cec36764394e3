#include "sparseview/trainer.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "sparseview/tau_noise.h"

namespace sparseview {
namespace {

constexpr std::uint64_t kRealTag = 0x7265616cULL;
constexpr std::uint64_t kPseudoTag = 0x70736575ULL;
constexpr std::uint64_t kPoseTag = 0x706f7365ULL;
constexpr std::uint64_t kPatchTag = 0x70617463ULL;
constexpr std::uint64_t kWeightNoiseTag = 0x77656967ULL;
constexpr std::uint64_t kLayerNoiseTag = 0x6c617965ULL;

struct Augmentation {
  FieldAugment field;
  WeightPerturbSpec weight;
};

// Builds the model-side augmentations for one step. The streams must outlive
// the returned specs.
Augmentation make_augmentation(const StudentConfig& config, const AugmentWeights& weights,
                               const TauNoiseStream& weight_noise,
                               const TauNoiseStream& layer_noise) {
  Augmentation a;
  a.weight.omega = weights.weight_perturb;
  a.weight.noise = &weight_noise;
  a.weight.clamp = config.clamp_weights;
  if (weights.layer_noise != 0.0) {
    a.field.layer_noise = LayerNoiseSpec{config.noise_targets, weights.layer_noise, &layer_noise};
  }
  return a;
}

}  // namespace

void TrainBatch::validate() const {
  if (rays.empty()) throw std::invalid_argument("TrainBatch: batch is empty");
  if (rays.size() != targets.size()) {
    throw std::invalid_argument("TrainBatch: " + std::to_string(rays.size()) + " rays but " +
                                std::to_string(targets.size()) + " targets");
  }
}

void LossConfig::validate() const {
  if (!(mix >= 0.0 && mix <= 1.0)) throw std::invalid_argument("LossConfig: mix must lie in [0, 1]");
}

void TrainingViews::validate() const {
  if (cameras.empty() || cameras.size() != images.size()) {
    throw std::invalid_argument("TrainingViews: need one image per camera and at least one view");
  }
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    cameras[i].validate();
    if (images[i].width() != cameras[i].width || images[i].height() != cameras[i].height) {
      throw std::invalid_argument("TrainingViews: image " + std::to_string(i) +
                                  " does not match its camera dims");
    }
  }
}

void salt_ray_ids(std::span<Ray> rays, std::uint64_t salt) {
  for (Ray& r : rays) r.id = mix_seed({salt, r.id});
}

TrainBatch sample_real_batch(const TrainingViews& views, std::size_t count, Rng& rng) {
  views.validate();
  std::vector<std::size_t> offsets{0};
  for (const auto& img : views.images) offsets.push_back(offsets.back() + img.pixel_count());
  TrainBatch batch;
  batch.tag = Supervision::kReal;
  batch.rays.reserve(count);
  batch.targets.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t flat = rng.below(offsets.back());
    const auto view = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin() - 1);
    const std::size_t index = flat - offsets[view];
    const Camera& cam = views.cameras[view];
    const Pixel p{static_cast<int>(index % static_cast<std::size_t>(cam.width)),
                  static_cast<int>(index / static_cast<std::size_t>(cam.width))};
    Ray ray = generate_rays(cam, std::span<const Pixel>(&p, 1)).front();
    ray.id = flat;
    batch.rays.push_back(ray);
    batch.targets.push_back(views.images[view].pixel(index));
  }
  return batch;
}

LossAndGradient real_loss_gradient(const FieldParams& model, const TrainBatch& batch,
                                   const RenderConfig& render, const FieldAugment& field_augment,
                                   const WeightPerturbSpec& weight_perturb, double scale) {
  batch.validate();
  render.validate();
  const std::size_t chunk = render.rays_per_chunk;
  const std::size_t chunks = (batch.rays.size() + chunk - 1) / chunk;
  std::vector<double> losses(chunks);
  std::vector<GradientSet> grads(chunks);
  // Chunks are independent; results are reduced in chunk order below.
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * chunk;
    const std::size_t size = std::min(chunk, batch.rays.size() - begin);
    Tape tape;
    const Var colors = record_rays(tape, model, std::span(batch.rays).subspan(begin, size), render,
                                   field_augment, weight_perturb, true);
    NumericArray target({size, 3});
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t k = 0; k < 3; ++k) target(r, k) = batch.targets[begin + r][k];
    }
    const Var loss = weighted_squared_error(tape, colors, std::move(target),
                                            std::vector<double>(size, 1.0), scale);
    losses[c] = tape.value(loss)[0];
    grads[c] = tape.backward(loss, model.store());
  }
  LossAndGradient out{0.0, model.store().zeros_like()};
  for (std::size_t c = 0; c < chunks; ++c) {
    out.loss += losses[c];
    out.gradient.add_scaled(grads[c], 1.0);
  }
  return out;
}

double pretrain_step(FieldParams& model, Adam& optimizer, const TrainBatch& batch,
                     const RenderConfig& render) {
  batch.validate();
  if (batch.tag != Supervision::kReal) {
    throw std::invalid_argument("pretrain_step: only real rays are allowed");
  }
  const double scale = 1.0 / (3.0 * static_cast<double>(batch.rays.size()));
  LossAndGradient lg = real_loss_gradient(model, batch, render, {}, {}, scale);
  optimizer.step(model.store(), lg.gradient);
  return lg.loss;
}

Camera sample_novel_pose(std::span<const Camera> cameras, Rng& rng, double t_lo, double t_hi) {
  if (cameras.size() < 2) {
    throw std::invalid_argument("sample_novel_pose: need at least two training cameras");
  }
  if (!(t_lo >= 0.0 && t_lo <= t_hi && t_hi <= 1.0)) {
    throw std::invalid_argument("sample_novel_pose: factor range must satisfy 0 <= lo <= hi <= 1");
  }
  const std::size_t i = rng.below(cameras.size());
  std::size_t j = rng.below(cameras.size() - 1);
  if (j >= i) ++j;
  const double t = t_lo == t_hi ? t_lo : rng.uniform(t_lo, t_hi);
  return interpolate_pose(cameras[i], cameras[j], t);
}

PseudoPatch make_pseudo_patch(const PseudoLabelSet& labels, const PatchSpec& spec, Rng& rng) {
  spec.validate();
  const Camera& cam = labels.camera;
  if (spec.side > cam.width || spec.side > cam.height) {
    throw std::invalid_argument("make_pseudo_patch: patch does not fit the novel view");
  }
  if (labels.labels.empty()) throw std::invalid_argument("make_pseudo_patch: no pseudo labels");
  const Pixel anchor = labels.labels[rng.below(labels.labels.size())].pixel;
  auto corner = [&](int a, int extent) {
    const int lo = std::max(0, a - spec.side + 1);
    const int hi = std::min(a, extent - spec.side);
    return lo + static_cast<int>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
  };
  const int x0 = corner(anchor.x, cam.width);
  const int y0 = corner(anchor.y, cam.height);

  PseudoPatch patch;
  patch.camera = cam;
  patch.side = spec.side;
  for (int y = y0; y < y0 + spec.side; ++y) {
    for (int x = x0; x < x0 + spec.side; ++x) patch.pixels.push_back({x, y});
  }
  for (const auto& l : labels.labels) {
    if (l.pixel.x < x0 || l.pixel.x >= x0 + spec.side || l.pixel.y < y0 ||
        l.pixel.y >= y0 + spec.side) {
      continue;
    }
    patch.labeled.push_back(static_cast<std::size_t>(l.pixel.y - y0) * spec.side +
                            static_cast<std::size_t>(l.pixel.x - x0));
    patch.targets.push_back(l.rgb);
  }
  // Labels arrive in row-major order, so the indices are already ascending.
  return patch;
}

Var pseudo_patch_loss(Tape& tape, Var patch_colors, const PseudoPatch& patch, int window,
                      double scale) {
  const NumericArray& colors = tape.value(patch_colors);
  const auto count = static_cast<std::size_t>(patch.side) * static_cast<std::size_t>(patch.side);
  if (patch.side < 1 || patch.pixels.size() != count || colors.rank() != 2 ||
      colors.rows() != count || colors.cols() != 3) {
    throw std::invalid_argument("pseudo_patch_loss: colors must be [side^2 x 3] for the patch");
  }
  if (patch.labeled.size() != patch.targets.size()) {
    throw std::invalid_argument("pseudo_patch_loss: labels and targets differ in length");
  }
  for (std::size_t k : patch.labeled) {
    if (k >= count) throw std::invalid_argument("pseudo_patch_loss: label index outside the patch");
  }
  std::vector<Rgb> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = {colors(i, 0), colors(i, 1), colors(i, 2)};
  std::vector<std::size_t> sources(count);
  if (window == 1) {
    for (std::size_t i = 0; i < count; ++i) sources[i] = i;
  } else {
    sources = brightest_sources(grid, patch.side, patch.side, window);
  }
  const Var dilated = gather_rows(tape, patch_colors, std::move(sources));
  const Var selected = gather_rows(tape, dilated, patch.labeled);
  NumericArray target({patch.labeled.size(), 3});
  for (std::size_t r = 0; r < patch.labeled.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) target(r, c) = patch.targets[r][c];
  }
  return weighted_squared_error(tape, selected, std::move(target),
                                std::vector<double>(patch.labeled.size(), 1.0), scale);
}

TrainState TrainState::from_pretrained(const FieldParams& pretrained, const AdamConfig& adam,
                                       NoiseSchedule weight_schedule, NoiseSchedule layer_schedule,
                                       std::uint64_t seed, double momentum) {
  weight_schedule.validate();
  layer_schedule.validate();
  if (!(momentum >= 0.0 && momentum <= 1.0)) {
    throw std::invalid_argument("TrainState: momentum must lie in [0, 1]");
  }
  return TrainState{pretrained, pretrained,      Adam(adam, pretrained.store()), 0,
                    weight_schedule, layer_schedule, seed, momentum};
}

AugmentWeights TrainState::augment_weights() const {
  return {noise_weight(weight_schedule, step), noise_weight(layer_schedule, step)};
}

StudentStepResult student_step(TrainState& state, const PseudoPatch* pseudo,
                               const PseudoLabelSet* selection, const TrainBatch& real,
                               const StudentConfig& config, const AugmentWeights& weights) {
  config.loss.validate();
  real.validate();
  if (real.tag != Supervision::kReal) {
    throw std::invalid_argument("student_step: the real batch must be tagged real");
  }
  if (!(weights.weight_perturb >= 0.0 && weights.layer_noise >= 0.0)) {
    throw std::invalid_argument("student_step: augmentation weights must be >= 0");
  }
  if (!state.teacher.same_architecture(state.student)) {
    throw std::invalid_argument("student_step: teacher and student architectures differ");
  }
  const double mix = config.loss.mix;
  const bool use_pseudo = mix > 0.0 && pseudo != nullptr && !pseudo->labeled.empty();
  if (use_pseudo) {
    if (selection == nullptr) {
      throw std::invalid_argument("student_step: pseudo patch given without its selection set");
    }
    const auto allowed_list = selection->pixel_indices();
    const std::unordered_set<std::size_t> allowed(allowed_list.begin(), allowed_list.end());
    if (pseudo->camera.width != selection->camera.width ||
        pseudo->camera.height != selection->camera.height) {
      throw std::invalid_argument("student_step: pseudo patch and selection dims differ");
    }
    for (std::size_t k : pseudo->labeled) {
      if (k >= pseudo->pixels.size()) {
        throw std::invalid_argument("student_step: label index outside the patch");
      }
      const Pixel& p = pseudo->pixels[k];
      const std::size_t index =
          static_cast<std::size_t>(p.y) * static_cast<std::size_t>(pseudo->camera.width) + p.x;
      if (!allowed.contains(index)) {
        throw std::invalid_argument("student_step: pseudo pixel (" + std::to_string(p.x) + ", " +
                                    std::to_string(p.y) + ") is not in the selection set");
      }
    }
  }

  const TauNoiseSampler sampler(config.tau_bound);
  const TauNoiseStream weight_noise(sampler, mix_seed({config.noise_seed, kWeightNoiseTag}));
  const TauNoiseStream layer_noise(sampler, mix_seed({config.noise_seed, kLayerNoiseTag}));
  const Augmentation aug = make_augmentation(config, weights, weight_noise, layer_noise);

  StudentStepResult result;
  const double real_scale = 1.0 / (3.0 * static_cast<double>(real.rays.size()));
  LossAndGradient r =
      real_loss_gradient(state.student, real, config.render, aug.field, aug.weight, real_scale);
  result.real_loss = r.loss;

  GradientSet total = state.student.store().zeros_like();
  total.add_scaled(r.gradient, 1.0 - mix);
  result.loss = (1.0 - mix) * r.loss;

  if (use_pseudo) {
    std::vector<Ray> rays = generate_rays(pseudo->camera, pseudo->pixels);
    salt_ray_ids(rays, mix_seed({state.seed, static_cast<std::uint64_t>(state.step), kPseudoTag}));
    Tape tape;
    const Var colors = record_rays(tape, state.student, rays, config.render, aug.field,
                                   aug.weight, true);
    const double scale = 1.0 / (3.0 * static_cast<double>(pseudo->labeled.size()));
    const Var loss = pseudo_patch_loss(tape, colors, *pseudo, config.patch.window, scale);
    result.pseudo_loss = tape.value(loss)[0];
    total.add_scaled(tape.backward(loss, state.student.store()), mix);
    result.loss += mix * result.pseudo_loss;
  }

  state.optimizer.step(state.student.store(), total);
  return result;
}

void SemiSupervisedConfig::validate() const {
  student.render.validate();
  student.loss.validate();
  student.patch.validate();
  ensemble.validate();
  hsv.validate();
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("SemiSupervisedConfig: kappa must lie in (0, 1]");
  if (!(low_contrast_share >= 0.0 && low_contrast_share <= 1.0)) {
    throw std::invalid_argument("SemiSupervisedConfig: low-contrast share must lie in [0, 1]");
  }
  if (refresh_period < 1) throw std::invalid_argument("SemiSupervisedConfig: refresh period must be >= 1");
  if (real_rays < 1) throw std::invalid_argument("SemiSupervisedConfig: need at least one real ray");
  if (steps < 0) throw std::invalid_argument("SemiSupervisedConfig: steps must be >= 0");
}

PseudoLabelSet teacher_pseudo_labels(const FieldParams& teacher, const Camera& camera,
                                     const SemiSupervisedConfig& config) {
  RenderConfig render = config.student.render;
  render.jitter = false;
  const std::vector<ImageBuffer> stack = render_ensemble(teacher, camera, config.ensemble, render);
  const auto zero = std::find(config.ensemble.ratios.begin(), config.ensemble.ratios.end(), 0.0);
  const ImageBuffer plain = zero != config.ensemble.ratios.end()
                                ? stack[static_cast<std::size_t>(zero - config.ensemble.ratios.begin())]
                                : render_image(FieldSource(teacher), camera, render).image;
  const std::vector<double> scores = epistemic_map(stack);
  const std::vector<std::uint8_t> mask = hsv_mask(ensemble_mean(stack), config.hsv);
  return select_pseudo(scores, mask, plain, camera, config.kappa, config.low_contrast_share);
}

void run_semi_supervised(TrainState& state, const TrainingViews& views,
                         const SemiSupervisedConfig& config, const StepObserver& observer) {
  config.validate();
  views.validate();
  if (views.cameras.size() < 2 && config.student.loss.mix > 0.0) {
    throw std::invalid_argument("run_semi_supervised: novel poses need at least two training views");
  }
  const std::int64_t first = state.step;
  PseudoLabelSet labels;
  for (std::int64_t k = 0; k < config.steps; ++k) {
    const std::int64_t step = state.step;
    const auto ustep = static_cast<std::uint64_t>(step);
    StepReport report;
    report.step = step;
    if (config.student.loss.mix > 0.0 && (step - first) % config.refresh_period == 0) {
      Rng pose_rng(mix_seed({state.seed, ustep, kPoseTag}));
      const Camera pose = sample_novel_pose(views.cameras, pose_rng);
      EnsembleConfig ensemble = config.ensemble;
      ensemble.dropout_seed = mix_seed({config.ensemble.dropout_seed, state.seed, ustep});
      SemiSupervisedConfig refresh = config;
      refresh.ensemble = ensemble;
      labels = teacher_pseudo_labels(state.teacher, pose, refresh);
      report.refreshed = true;
    }
    report.selected = labels.labels.size();

    Rng real_rng(mix_seed({state.seed, ustep, kRealTag}));
    TrainBatch real = sample_real_batch(views, config.real_rays, real_rng);
    salt_ray_ids(real.rays, mix_seed({state.seed, ustep, kRealTag}));

    PseudoPatch patch;
    const bool have_patch = config.student.loss.mix > 0.0 && !labels.labels.empty();
    if (have_patch) {
      Rng patch_rng(mix_seed({state.seed, ustep, kPatchTag}));
      patch = make_pseudo_patch(labels, config.student.patch, patch_rng);
    }

    report.weights = state.augment_weights();
    report.result = student_step(state, have_patch ? &patch : nullptr, have_patch ? &labels : nullptr,
                                 real, config.student, report.weights);
    ema_update(state.teacher, state.student, state.momentum);
    ++state.step;
    if (observer) observer(report, state);
  }
}

}  // namespace sparseview
