#include <benchmark/benchmark.h>

#include <vector>

#include "sparseview/augment.h"
#include "sparseview/camera.h"
#include "sparseview/field.h"
#include "sparseview/metrics.h"
#include "sparseview/renderer.h"
#include "sparseview/runtime.h"
#include "sparseview/scene.h"
#include "sparseview/tau_noise.h"

namespace sv = sparseview;

namespace {

sv::Camera bench_camera(int side) {
  sv::SceneSpec spec = sv::default_scene_spec();
  spec.width = side;
  spec.height = side;
  return sv::orbit_camera(spec, 0.0, 20.0, 2.5);
}

void BM_FieldForward(benchmark::State& state) {
  const auto points = static_cast<std::size_t>(state.range(0));
  const sv::FieldParams params = sv::FieldParams::initialize({}, 1);
  std::vector<double> xyz(3 * points), dirs(3 * points);
  std::vector<std::uint64_t> keys(points);
  for (std::size_t i = 0; i < points; ++i) {
    xyz[3 * i] = 0.001 * static_cast<double>(i);
    dirs[3 * i + 2] = -1.0;
    keys[i] = i;
  }
  std::vector<double> rgb(3 * points), sigma(points);
  const sv::FieldSource source(params);
  for (auto _ : state) {
    source.evaluate(xyz, dirs, keys, rgb, sigma);
    benchmark::DoNotOptimize(rgb.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points));
}
BENCHMARK(BM_FieldForward)->Arg(256)->Arg(1024)->Arg(4096);

void BM_TrainChunk(benchmark::State& state) {
  const sv::FieldParams params = sv::FieldParams::initialize({}, 1);
  const auto rays = sv::generate_rays(bench_camera(64));
  const std::vector<sv::Ray> chunk(rays.begin() + 2000, rays.begin() + 2000 + state.range(0));
  sv::RenderConfig config;
  config.jitter = true;
  for (auto _ : state) {
    sv::Tape tape;
    const sv::Var colors = sv::record_rays(tape, params, chunk, config, {}, {});
    const sv::Var loss = sv::sum(tape, colors);
    benchmark::DoNotOptimize(tape.backward(loss, params.store()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainChunk)->Arg(16)->Arg(64);

void BM_RenderImage(benchmark::State& state) {
  const sv::FieldParams params = sv::FieldParams::initialize({}, 1);
  const sv::Camera camera = bench_camera(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sv::render_image(sv::FieldSource(params), camera, {}));
  }
}
BENCHMARK(BM_RenderImage)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_OracleRender(benchmark::State& state) {
  const sv::SceneSpec spec = sv::default_scene_spec();
  const sv::AnalyticField field(spec.primitives);
  const sv::Camera camera = bench_camera(64);
  sv::RenderConfig config;
  config.samples = 256;
  for (auto _ : state) benchmark::DoNotOptimize(sv::render_image(field, camera, config));
}
BENCHMARK(BM_OracleRender)->Unit(benchmark::kMillisecond);

void BM_TauSample(benchmark::State& state) {
  const sv::TauNoiseSampler sampler;
  sv::Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(rng));
}
BENCHMARK(BM_TauSample);

void BM_Ssim(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  sv::ImageBuffer a(side, side), b(side, side);
  sv::Rng rng(3);
  for (double& v : a.values()) v = rng.uniform();
  for (double& v : b.values()) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(sv::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64);

void BM_BrightestDilate(benchmark::State& state) {
  std::vector<sv::Rgb> grid(64);
  sv::Rng rng(5);
  for (auto& c : grid) c = {rng.uniform(), rng.uniform(), rng.uniform()};
  for (auto _ : state) benchmark::DoNotOptimize(sv::brightest_dilate(grid, 8, 8, 3));
}
BENCHMARK(BM_BrightestDilate);

}  // namespace

int main(int argc, char** argv) {
  sv::configure_runtime();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
