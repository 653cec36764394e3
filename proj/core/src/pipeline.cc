#include "sparseview/pipeline.h"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "sparseview/checkpoint.h"
#include "sparseview/metrics.h"
#include "sparseview/trainer.h"

namespace sparseview {
namespace {

constexpr std::uint64_t kInitTag = 0x696e6974ULL;
constexpr std::uint64_t kPretrainTag = 0x70726574ULL;
constexpr std::uint64_t kFinetuneTag = 0x66696e65ULL;
constexpr std::uint64_t kRobustTag = 0x726f6275ULL;

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

TrainingViews training_views(const Scene& scene) {
  return {scene.train_cameras, scene.train_images};
}

bool due(int interval, std::int64_t done, std::int64_t total) {
  return done == total || (interval > 0 && done % interval == 0);
}

void add_psnr(MetricsRow& row, const FieldParams& model, const Scene& scene,
              const RenderConfig& render) {
  row.train_psnr = mean_view_psnr(model, scene.train_cameras, scene.train_images, render);
  if (!scene.heldout_cameras.empty()) {
    row.heldout_psnr = mean_view_psnr(model, scene.heldout_cameras, scene.heldout_images, render);
  }
}

}  // namespace

MetricsLog::MetricsLog(const std::filesystem::path& path) {
  file_.emplace(path, std::ios::trunc);
  if (!*file_) throw std::runtime_error("cannot write metrics log '" + path.string() + "'");
  *file_ << "# format_version=" << kMetricsFormatVersion << "\n" << header() << "\n";
  file_->flush();
}

std::string MetricsLog::header() { return "step,stage,loss,omega,train_psnr,heldout_psnr"; }

std::string MetricsLog::format(const MetricsRow& row) {
  return std::to_string(row.step) + "," + row.stage + "," + number(row.loss) + "," +
         number(row.omega) + "," + (row.train_psnr ? number(*row.train_psnr) : "") + "," +
         (row.heldout_psnr ? number(*row.heldout_psnr) : "");
}

void MetricsLog::append(const MetricsRow& row) {
  rows_.push_back(row);
  if (file_) {
    *file_ << format(row) << "\n";
    file_->flush();
  }
}

Scene build_scene(const RunConfig& config) {
  config.validate();
  return make_scene(scene_spec(config), render_config(config));
}

double mean_view_psnr(const FieldParams& model, std::span<const Camera> cameras,
                      std::span<const ImageBuffer> references, const RenderConfig& render) {
  if (cameras.empty() || cameras.size() != references.size()) {
    throw std::invalid_argument("mean_view_psnr: need one reference per camera");
  }
  double total = 0.0;
  const FieldSource source(model);
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    total += psnr(render_image(source, cameras[i], render).image, references[i]);
  }
  return total / static_cast<double>(cameras.size());
}

FieldParams run_pretraining(const RunConfig& config, const Scene& scene, StageOutput output) {
  config.validate();
  const TrainingViews views = training_views(scene);
  FieldParams model =
      FieldParams::initialize(field_architecture(config), mix_seed({config.seed, kInitTag}));
  Adam optimizer(pretrain_adam(config), model.store());
  RenderConfig train_render = render_config(config);
  train_render.jitter = true;
  const RenderConfig eval_render = render_config(config);

  const auto total = static_cast<std::int64_t>(config.pretrain_steps);
  for (std::int64_t step = 0; step < total; ++step) {
    const auto ustep = static_cast<std::uint64_t>(step);
    Rng rng(mix_seed({config.seed, kPretrainTag, ustep}));
    TrainBatch batch = sample_real_batch(views, static_cast<std::size_t>(config.pretrain_rays), rng);
    salt_ray_ids(batch.rays, mix_seed({config.seed, kPretrainTag, ustep, 1}));
    MetricsRow row{step + 1, "pretrain", pretrain_step(model, optimizer, batch, train_render), 0.0,
                   {}, {}};
    const std::int64_t done = step + 1;
    if (output.log) {
      if (config.eval_interval > 0 && due(config.eval_interval, done, total)) {
        add_psnr(row, model, scene, eval_render);
      }
      output.log->append(row);
    }
    if (output.directory && config.checkpoint_interval > 0 && done % config.checkpoint_interval == 0) {
      save_checkpoint(*output.directory / ("pretrain_" + std::to_string(done) + ".svck"), model);
    }
  }
  if (output.directory) save_checkpoint(*output.directory / "pretrain.svck", model);
  return model;
}

FieldParams run_finetuning(const RunConfig& config, const Scene& scene,
                           const FieldParams& pretrained, StageOutput output) {
  config.validate();
  if (pretrained.architecture() != field_architecture(config)) {
    throw std::invalid_argument("run_finetuning: checkpoint architecture does not match the config");
  }
  const TrainingViews views = training_views(scene);
  TrainState state = TrainState::from_pretrained(
      pretrained, finetune_adam(config), weight_noise_schedule(config),
      layer_noise_schedule(config), mix_seed({config.seed, kFinetuneTag}), config.ema_momentum);
  const SemiSupervisedConfig semi = semi_supervised_config(config);
  const RenderConfig eval_render = render_config(config);
  const auto total = static_cast<std::int64_t>(config.finetune_steps);

  run_semi_supervised(state, views, semi, [&](const StepReport& report, const TrainState& s) {
    const std::int64_t done = report.step + 1;
    if (output.log) {
      MetricsRow row{done, "finetune", report.result.loss, report.weights.weight_perturb, {}, {}};
      if (config.eval_interval > 0 && due(config.eval_interval, done, total)) {
        add_psnr(row, s.teacher, scene, eval_render);
      }
      output.log->append(row);
    }
    if (output.directory && config.checkpoint_interval > 0 && done % config.checkpoint_interval == 0) {
      save_checkpoint(*output.directory / ("finetune_" + std::to_string(done) + ".svck"), s.teacher);
    }
  });
  if (output.directory) save_checkpoint(*output.directory / "teacher.svck", state.teacher);
  return state.teacher;
}

EvaluationReport evaluate_model(const FieldParams& model, const RunConfig& config,
                                const Scene& scene) {
  config.validate();
  if (model.architecture() != field_architecture(config)) {
    const FieldArchitecture& a = model.architecture();
    const FieldArchitecture b = field_architecture(config);
    throw std::invalid_argument(
        "evaluate: checkpoint architecture (trunk " + std::to_string(a.trunk_layers) + "x" +
        std::to_string(a.trunk_width) + ", L_pos " + std::to_string(a.position_frequencies) +
        ", L_dir " + std::to_string(a.direction_frequencies) + ") does not match the config (trunk " +
        std::to_string(b.trunk_layers) + "x" + std::to_string(b.trunk_width) + ", L_pos " +
        std::to_string(b.position_frequencies) + ", L_dir " +
        std::to_string(b.direction_frequencies) + ")");
  }
  const RenderConfig render = render_config(config);
  const FieldSource source(model);
  EvaluationReport report;
  auto score = [&](std::span<const Camera> cams, std::span<const ImageBuffer> refs,
                   std::vector<ViewScore>& out) {
    for (std::size_t i = 0; i < cams.size(); ++i) {
      const ImageBuffer img = render_image(source, cams[i], render).image;
      out.push_back({psnr(img, refs[i]), ssim(img, refs[i])});
    }
  };
  score(scene.train_cameras, scene.train_images, report.train);
  score(scene.heldout_cameras, scene.heldout_images, report.heldout);
  for (const auto& v : report.train) report.mean_train_psnr += v.psnr / report.train.size();
  for (const auto& v : report.heldout) {
    report.mean_heldout_psnr += v.psnr / report.heldout.size();
    report.mean_heldout_ssim += v.ssim / report.heldout.size();
  }

  const bool heldout = !scene.heldout_cameras.empty();
  report.robustness = robustness_report(
      source, heldout ? scene.heldout_cameras : scene.train_cameras,
      heldout ? scene.heldout_images : scene.train_images, config.robustness_amplitude, render,
      mix_seed({config.seed, kRobustTag}));

  const RenderConfig oracle = oracle_config(scene.spec, render);
  const Camera& first = scene.train_cameras.front();
  const Camera& last = scene.train_cameras.back();
  for (int f = 0; f < config.sweep_frames; ++f) {
    const double t = static_cast<double>(f) / (config.sweep_frames - 1);
    const Camera cam = interpolate_pose(first, last, t);
    report.sweep_psnr.push_back(psnr(render_image(source, cam, render).image,
                                     render_image(scene.field, cam, oracle).image));
  }
  double mean = 0.0;
  for (double p : report.sweep_psnr) mean += p;
  mean /= static_cast<double>(report.sweep_psnr.size());
  for (double p : report.sweep_psnr) report.flicker += (p - mean) * (p - mean);
  report.flicker /= static_cast<double>(report.sweep_psnr.size());
  return report;
}

std::string format_report(const EvaluationReport& r) {
  std::ostringstream out;
  out << "view        psnr_db   ssim\n";
  for (std::size_t i = 0; i < r.train.size(); ++i) {
    out << "train_" << i << "     " << fixed(r.train[i].psnr) << "  " << fixed(r.train[i].ssim, 4) << "\n";
  }
  for (std::size_t i = 0; i < r.heldout.size(); ++i) {
    out << "heldout_" << i << "   " << fixed(r.heldout[i].psnr) << "  " << fixed(r.heldout[i].ssim, 4)
        << "\n";
  }
  out << "mean train psnr    " << fixed(r.mean_train_psnr) << "\n";
  if (!r.heldout.empty()) {
    out << "mean heldout psnr  " << fixed(r.mean_heldout_psnr) << "\n";
    out << "mean heldout ssim  " << fixed(r.mean_heldout_ssim, 4) << "\n";
  }
  out << "\nrobustness (uniform density noise, amplitude " << fixed(r.robustness.amplitude, 2) << ")\n";
  out << "view   clean_db  noisy_db\n";
  for (std::size_t i = 0; i < r.robustness.views.size(); ++i) {
    out << i << "      " << fixed(r.robustness.views[i].clean_psnr) << "   "
        << fixed(r.robustness.views[i].noisy_psnr) << "\n";
  }
  out << "mean   " << fixed(r.robustness.mean_clean) << "   " << fixed(r.robustness.mean_noisy)
      << "   drop " << fixed(r.robustness.drop()) << "\n";
  out << "\nsweep psnr:";
  for (double p : r.sweep_psnr) out << " " << fixed(p, 2);
  out << "\nflicker (psnr variance) " << fixed(r.flicker, 4) << "\n";
  return out.str();
}

std::string format_sensitivity(const SensitivityReport& report) {
  std::ostringstream out;
  out << "layer        variance\n";
  for (std::size_t i = 0; i < report.layers.size(); ++i) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-12s %.6e\n", report.layers[i].c_str(), report.scores[i]);
    out << buf;
  }
  out << "ranking:";
  for (const auto& l : report.ranking) out << " " << l;
  out << "\n";
  return out.str();
}

}  // namespace sparseview
