// Command line front end: pretrain, finetune, render, evaluate and
// analyze-layers.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparseview/checkpoint.h"
#include "sparseview/config.h"
#include "sparseview/image.h"
#include "sparseview/pipeline.h"
#include "sparseview/runtime.h"

namespace sv = sparseview;

namespace {

sv::RunConfig load_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed) {
  sv::RunConfig config = sv::load_config(path);
  if (seed) config.seed = *seed;
  config.validate();
  return config;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + item + "' in " + what);
    }
  }
  return out;
}

// identity | orbit:az,el,r | file:<path> | <path>. A pose file holds the nine
// rotation entries (row-major) followed by the camera center.
sv::Camera parse_pose(const std::string& spec, const sv::RunConfig& config) {
  const sv::SceneSpec scene = sv::scene_spec(config);
  const double focal = sv::Camera::focal_from_fov(config.rig_fov, config.width);
  if (spec == "identity") {
    sv::Camera cam;
    cam.focal = focal;
    cam.width = config.width;
    cam.height = config.height;
    return cam;
  }
  if (spec.rfind("orbit:", 0) == 0) {
    const auto v = parse_numbers(spec.substr(6), "orbit pose");
    if (v.size() != 3) throw std::invalid_argument("orbit pose expects az,el,r");
    return sv::orbit_camera(scene, v[0], v[1], v[2]);
  }
  const std::string path = spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("unknown pose spec '" + spec + "'");
  std::vector<double> v;
  double d;
  while (in >> d) v.push_back(d);
  if (!in.eof() || v.size() != 12) {
    throw std::invalid_argument("pose file '" + path + "' must hold 12 numbers");
  }
  sv::Camera cam;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cam.rotation(r, c) = v[3 * r + c];
  }
  cam.translation = Eigen::Vector3d(v[9], v[10], v[11]);
  cam.focal = focal;
  cam.width = config.width;
  cam.height = config.height;
  cam.validate();
  return cam;
}

int cmd_pretrain(const std::string& config_path, const std::optional<std::string>& out_dir,
                 const std::optional<std::uint64_t>& seed) {
  sv::RunConfig config = load_with_seed(config_path, seed);
  if (out_dir) config.output_dir = *out_dir;
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  sv::save_config(dir / "config.txt", config);
  const sv::Scene scene = sv::build_scene(config);
  sv::MetricsLog log(dir / "metrics.csv");
  const sv::FieldParams model = sv::run_pretraining(config, scene, {&dir, &log});
  const sv::RenderConfig render = sv::render_config(config);
  std::cout << "pretrained " << config.pretrain_steps << " steps; train psnr "
            << sv::mean_view_psnr(model, scene.train_cameras, scene.train_images, render)
            << " dB\ncheckpoint " << (dir / "pretrain.svck").string() << "\n";
  return 0;
}

int cmd_finetune(const std::string& config_path, const std::string& checkpoint,
                 const std::optional<std::string>& out_dir, const std::optional<std::uint64_t>& seed) {
  sv::RunConfig config = load_with_seed(config_path, seed);
  if (out_dir) config.output_dir = *out_dir;
  const sv::FieldParams pretrained = sv::load_checkpoint(checkpoint);
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  const sv::Scene scene = sv::build_scene(config);
  sv::MetricsLog log(dir / "finetune_metrics.csv");
  sv::run_finetuning(config, scene, pretrained, {&dir, &log});
  std::cout << "finetuned " << config.finetune_steps << " steps\nteacher "
            << (dir / "teacher.svck").string() << "\n";
  return 0;
}

int cmd_render(const std::string& checkpoint, const std::string& pose, const std::string& out,
               const std::optional<std::string>& config_path,
               const std::optional<std::uint64_t>& seed) {
  sv::RunConfig config = config_path ? load_with_seed(*config_path, seed) : sv::RunConfig{};
  if (seed) config.seed = *seed;
  const sv::FieldParams model = sv::load_checkpoint(checkpoint);
  const sv::Camera camera = parse_pose(pose, config);
  const sv::RenderResult result =
      sv::render_image(sv::FieldSource(model), camera, sv::render_config(config));
  sv::write_png(out, result.image);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& config_path,
                 const std::optional<std::uint64_t>& seed) {
  const sv::RunConfig config = load_with_seed(config_path, seed);
  const sv::FieldParams model = sv::load_checkpoint(checkpoint);
  const sv::Scene scene = sv::build_scene(config);
  std::cout << sv::format_report(sv::evaluate_model(model, config, scene));
  return 0;
}

int cmd_analyze(const std::vector<std::string>& checkpoints) {
  if (checkpoints.size() < 2) throw std::invalid_argument("analyze-layers needs at least two checkpoints");
  std::vector<sv::FieldParams> models;
  for (const auto& path : checkpoints) models.push_back(sv::load_checkpoint(path));
  std::cout << sv::format_sensitivity(sv::layer_sensitivity(models));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  sv::configure_runtime();
  CLI::App app{"Sparse-view radiance field training with a teacher-student finetuning stage"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "override the config seed everywhere");

  std::string config_path, checkpoint, pose, out;
  std::optional<std::string> out_dir, render_config;
  std::vector<std::string> checkpoints;

  auto* pretrain = app.add_subcommand("pretrain", "supervised pretraining on the sparse views");
  pretrain->add_option("config", config_path, "run config file")->required();
  pretrain->add_option("--out", out_dir, "output directory (overrides output_dir)");

  auto* finetune = app.add_subcommand("finetune", "teacher-student finetuning from a checkpoint");
  finetune->add_option("config", config_path, "run config file")->required();
  finetune->add_option("checkpoint", checkpoint, "pretrained checkpoint")->required();
  finetune->add_option("--out", out_dir, "output directory (overrides output_dir)");

  auto* render = app.add_subcommand("render", "render one view of a checkpoint to PNG");
  render->add_option("checkpoint", checkpoint, "model checkpoint")->required();
  render->add_option("pose", pose, "identity | orbit:az,el,r | file:<path>")->required();
  render->add_option("out", out, "output PNG")->required();
  render->add_option("--config", render_config, "config supplying image size and sampling");

  auto* evaluate = app.add_subcommand("evaluate", "PSNR/SSIM table and robustness report");
  evaluate->add_option("checkpoint", checkpoint, "model checkpoint")->required();
  evaluate->add_option("config", config_path, "run config file")->required();

  auto* analyze = app.add_subcommand("analyze-layers", "per-layer parameter variance across checkpoints");
  analyze->add_option("checkpoints", checkpoints, "two or more checkpoints")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << app.help();
    return code;
  }

  try {
    if (*pretrain) return cmd_pretrain(config_path, out_dir, seed);
    if (*finetune) return cmd_finetune(config_path, checkpoint, out_dir, seed);
    if (*render) return cmd_render(checkpoint, pose, out, render_config, seed);
    if (*evaluate) return cmd_evaluate(checkpoint, config_path, seed);
    if (*analyze) return cmd_analyze(checkpoints);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
