#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sparseview/config.h"
#include "sparseview/field.h"
#include "sparseview/robustness.h"
#include "sparseview/scene.h"

namespace sparseview {

inline constexpr int kMetricsFormatVersion = 1;

struct MetricsRow {
  std::int64_t step = 0;
  std::string stage;  // pretrain | finetune
  double loss = 0.0;
  double omega = 0.0;
  std::optional<double> train_psnr;
  std::optional<double> heldout_psnr;
};

// Append-only metrics CSV: a "# format_version=1" line, a header, one row per
// step. Rows are also kept in memory.
class MetricsLog {
 public:
  MetricsLog() = default;
  // Creates (truncates) the file and writes the preamble.
  explicit MetricsLog(const std::filesystem::path& path);

  void append(const MetricsRow& row);
  const std::vector<MetricsRow>& rows() const noexcept { return rows_; }

  static std::string header();
  static std::string format(const MetricsRow& row);

 private:
  std::optional<std::ofstream> file_;
  std::vector<MetricsRow> rows_;
};

// Scene and oracle views described by the config.
Scene build_scene(const RunConfig& config);

// Where a stage writes its checkpoints; null disables file output.
struct StageOutput {
  const std::filesystem::path* directory = nullptr;
  MetricsLog* log = nullptr;
};

// Supervised pretraining from a seeded initialization. Checkpoints go to
// <dir>/pretrain_<step>.svck and <dir>/pretrain.svck.
FieldParams run_pretraining(const RunConfig& config, const Scene& scene, StageOutput output = {});

// Semi-supervised stage started from `pretrained`; returns the teacher.
// Checkpoints go to <dir>/finetune_<step>.svck and <dir>/teacher.svck.
FieldParams run_finetuning(const RunConfig& config, const Scene& scene,
                           const FieldParams& pretrained, StageOutput output = {});

struct ViewScore {
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvaluationReport {
  std::vector<ViewScore> train;
  std::vector<ViewScore> heldout;
  double mean_train_psnr = 0.0;
  double mean_heldout_psnr = 0.0;
  double mean_heldout_ssim = 0.0;
  RobustnessReport robustness;
  // Population variance of per-frame PSNR along an interpolated sweep between
  // the first and last training cameras.
  std::vector<double> sweep_psnr;
  double flicker = 0.0;
};

// Throws if the model's architecture differs from the config's.
EvaluationReport evaluate_model(const FieldParams& model, const RunConfig& config,
                                const Scene& scene);

std::string format_report(const EvaluationReport& report);
std::string format_sensitivity(const SensitivityReport& report);

// Mean PSNR of `model` over the given views.
double mean_view_psnr(const FieldParams& model, std::span<const Camera> cameras,
                      std::span<const ImageBuffer> references, const RenderConfig& render);

}  // namespace sparseview
