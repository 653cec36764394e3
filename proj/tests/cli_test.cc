#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "sparseview/checkpoint.h"
#include "sparseview/config.h"
#include "sparseview/image.h"
#include "test_util.h"

namespace sparseview {
namespace {

struct Outcome {
  int status = -1;
  std::string output;
};

Outcome run_cli(const std::string& args) {
  const auto log = testing::temp_dir("cli") / "last_output.txt";
  const std::string cmd = std::string("\"") + SPARSEVIEW_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  Outcome out;
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream s;
  s << in.rdbuf();
  out.output = s.str();
  return out;
}

RunConfig tiny_config() {
  RunConfig c;
  c.width = c.height = 16;
  c.oracle_samples = 32;
  c.samples = 8;
  c.trunk_layers = 2;
  c.trunk_width = 8;
  c.position_frequencies = 2;
  c.direction_frequencies = 1;
  c.pretrain_steps = 3;
  c.pretrain_rays = 16;
  c.finetune_steps = 2;
  c.finetune_real_rays = 8;
  c.sweep_frames = 2;
  c.eval_interval = 0;
  return c;
}

std::filesystem::path write_tiny_config(const std::string& name) {
  const auto path = testing::temp_dir("cli") / name;
  save_config(path, tiny_config());
  return path;
}

FieldParams tiny_model() { return FieldParams::initialize(field_architecture(tiny_config()), 1); }

TEST(CliTest, RenderIdentityPoseWritesPng) {
  const auto dir = testing::temp_dir("cli");
  save_checkpoint(dir / "m.svck", tiny_model());
  const auto png = dir / "identity.png";
  std::filesystem::remove(png);
  const Outcome r = run_cli("render \"" + (dir / "m.svck").string() + "\" identity \"" + png.string() +
                            "\" --config \"" + write_tiny_config("render.cfg").string() + "\"");
  EXPECT_EQ(r.status, 0) << r.output;
  const ImageBuffer img = read_png(png);
  EXPECT_EQ(img.width(), 16);
  EXPECT_EQ(img.height(), 16);
}

TEST(CliTest, RenderOrbitAndPoseFile) {
  const auto dir = testing::temp_dir("cli");
  save_checkpoint(dir / "m.svck", tiny_model());
  const std::string cfg = write_tiny_config("render2.cfg").string();
  EXPECT_EQ(run_cli("render \"" + (dir / "m.svck").string() + "\" orbit:30,20,2.5 \"" +
                    (dir / "orbit.png").string() + "\" --config \"" + cfg + "\"")
                .status,
            0);
  std::ofstream(dir / "pose.txt") << "1 0 0\n0 1 0\n0 0 1\n0 0 2.5\n";
  EXPECT_EQ(run_cli("render \"" + (dir / "m.svck").string() + "\" file:" + (dir / "pose.txt").string() +
                    " \"" + (dir / "file.png").string() + "\" --config \"" + cfg + "\"")
                .status,
            0);
  const Outcome bad = run_cli("render \"" + (dir / "m.svck").string() + "\" orbit:1,2 \"" +
                              (dir / "bad.png").string() + "\"");
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.output.find("error:"), std::string::npos) << bad.output;
}

TEST(CliTest, EvaluateWithMismatchedArchitectureFails) {
  const auto dir = testing::temp_dir("cli");
  FieldArchitecture other = field_architecture(tiny_config());
  other.trunk_width = 12;
  save_checkpoint(dir / "wide.svck", FieldParams::initialize(other, 1));
  const Outcome r = run_cli("evaluate \"" + (dir / "wide.svck").string() + "\" \"" +
                            write_tiny_config("eval.cfg").string() + "\"");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("architecture"), std::string::npos) << r.output;
}

TEST(CliTest, EvaluatePrintsTables) {
  const auto dir = testing::temp_dir("cli");
  save_checkpoint(dir / "m.svck", tiny_model());
  const Outcome r = run_cli("evaluate \"" + (dir / "m.svck").string() + "\" \"" +
                            write_tiny_config("eval2.cfg").string() + "\"");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("heldout_0"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("robustness"), std::string::npos) << r.output;
}

TEST(CliTest, PretrainFinetuneAndSeedOverride) {
  const auto dir = testing::temp_dir("cli_run");
  const std::string cfg = write_tiny_config("run.cfg").string();
  const Outcome pre = run_cli("--seed 99 pretrain \"" + cfg + "\" --out \"" + dir.string() + "\"");
  ASSERT_EQ(pre.status, 0) << pre.output;
  EXPECT_EQ(load_config(dir / "config.txt").seed, 99u);
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics.csv"));
  const Outcome ft = run_cli("finetune \"" + cfg + "\" \"" + (dir / "pretrain.svck").string() +
                             "\" --out \"" + dir.string() + "\"");
  ASSERT_EQ(ft.status, 0) << ft.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "teacher.svck"));
  const Outcome an = run_cli("analyze-layers \"" + (dir / "pretrain.svck").string() + "\" \"" +
                             (dir / "teacher.svck").string() + "\"");
  EXPECT_EQ(an.status, 0) << an.output;
  EXPECT_NE(an.output.find("ranking:"), std::string::npos) << an.output;
}

TEST(CliTest, ValidationFailuresExitNonzero) {
  const auto dir = testing::temp_dir("cli");
  save_checkpoint(dir / "m.svck", tiny_model());
  EXPECT_NE(run_cli("analyze-layers \"" + (dir / "m.svck").string() + "\"").status, 0);
  EXPECT_NE(run_cli("finetune \"" + write_tiny_config("x.cfg").string() + "\" \"" +
                    (dir / "missing.svck").string() + "\"")
                .status,
            0);
  std::ofstream(dir / "bad.cfg") << "format_version = 1\nunknown_knob = 3\n";
  const Outcome bad = run_cli("pretrain \"" + (dir / "bad.cfg").string() + "\"");
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.output.find("unknown_knob"), std::string::npos) << bad.output;
  const Outcome usage = run_cli("frobnicate");
  EXPECT_NE(usage.status, 0);
  EXPECT_NE(usage.output.find("pretrain"), std::string::npos) << usage.output;
}

}  // namespace
}  // namespace sparseview
