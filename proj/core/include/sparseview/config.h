#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sparseview/adam.h"
#include "sparseview/field.h"
#include "sparseview/renderer.h"
#include "sparseview/scene.h"
#include "sparseview/trainer.h"

namespace sparseview {

inline constexpr int kConfigFormatVersion = 1;

// Every knob of a run. The text form is "key = value" lines; '#' starts a
// comment. The first key must be format_version. Unknown keys are errors.
struct RunConfig {
  // scene
  std::string scene = "default";  // default | empty
  int width = 64;
  int height = 64;
  int train_views = 3;
  int heldout_views = 2;
  int oracle_samples = 256;
  Rgb background{0.0, 0.0, 0.0};
  double rig_radius = 2.5;
  double rig_elevation = 20.0;
  double rig_fov = 45.0;
  double rig_azimuth_span = 60.0;

  // rendering
  int samples = 64;
  double near = 0.5;
  double far = 3.5;
  int rays_per_chunk = 16;

  // model
  int trunk_layers = 4;
  int trunk_width = 64;
  int position_frequencies = 6;
  int direction_frequencies = 2;
  double position_scale = 0.5;

  // optimizer
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // pretraining
  int pretrain_steps = 2000;
  int pretrain_rays = 256;
  double pretrain_lr = 5e-3;

  // semi-supervised finetuning
  int finetune_steps = 500;
  int finetune_real_rays = 64;
  double finetune_lr = 1e-3;
  double mix = 0.5;
  double ema_momentum = 0.99;
  int refresh_period = 50;
  double weight_noise_max = 0.05;
  double layer_noise_max = 0.1;
  double noise_warmup_fraction = 0.25;
  std::vector<std::string> noise_targets{"head.rgb", "head.sigma"};
  double tau_bound = 3.0;
  bool clamp_weights = true;
  int patch_side = 8;
  int dilation_window = 3;
  std::vector<double> dropout_ratios{0.0, 0.05, 0.15, 0.20};
  double kappa = 0.10;
  double low_contrast_share = 0.5;
  double hsv_v_lower = 0.2;
  double hsv_s_lower = 0.2;

  // evaluation and output
  int eval_interval = 100;        // held-out PSNR cadence in the metrics log; 0 disables
  int checkpoint_interval = 500;  // 0 writes only the final checkpoint
  double robustness_amplitude = 0.5;
  int sweep_frames = 8;
  std::string output_dir = "run";

  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ConfigKeyInfo {
  std::string name;
  std::string description;
};

// All keys in file order with a one-line description.
std::vector<ConfigKeyInfo> config_keys();

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// Full listing of every key, defaults included, with descriptions.
std::string serialize_config(const RunConfig& config);
void save_config(const std::filesystem::path& path, const RunConfig& config);

// Views onto the typed module configs.
SceneSpec scene_spec(const RunConfig& config);
RenderConfig render_config(const RunConfig& config);
FieldArchitecture field_architecture(const RunConfig& config);
AdamConfig pretrain_adam(const RunConfig& config);
AdamConfig finetune_adam(const RunConfig& config);
SemiSupervisedConfig semi_supervised_config(const RunConfig& config);
NoiseSchedule weight_noise_schedule(const RunConfig& config);
NoiseSchedule layer_noise_schedule(const RunConfig& config);

}  // namespace sparseview
