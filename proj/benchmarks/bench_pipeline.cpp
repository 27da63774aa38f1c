#include <benchmark/benchmark.h>

#include "fhr/heatmap_codec.hpp"
#include "fhr/rng.hpp"
#include "fhr/stabilizer.hpp"
#include "fhr/synth.hpp"
#include "fhr/training.hpp"

namespace {

void BM_RenderHeatmaps(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const fhr::GridSpec grid{size, size, 8.0, 3.0};
  fhr::LandmarkSet landmarks;
  for (int m = 0; m < 7; ++m) landmarks.push_back({(10.0 + 5.0 * m) * grid.scale, 200.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(fhr::render_heatmaps(landmarks, grid, fhr::EncodeMode::kFractional));
  }
}
BENCHMARK(BM_RenderHeatmaps)->Arg(64)->Arg(128);

void BM_FractionalDecode(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const fhr::GridSpec grid{size, size, 8.0, 3.0};
  fhr::LandmarkSet landmarks;
  for (int m = 0; m < 7; ++m) landmarks.push_back({(10.3 + 5.1 * m) * grid.scale, 201.7});
  const fhr::HeatmapStack stack = fhr::render_heatmaps(landmarks, grid, fhr::EncodeMode::kFractional);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fhr::decode_stack(stack, fhr::DecodeMode::kFhr));
  }
}
BENCHMARK(BM_FractionalDecode)->Arg(64)->Arg(128);

void BM_StabilizeFrame(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  fhr::BenchmarkConfig config;
  config.train_videos = 2;
  config.test_videos = 0;
  config.frames = 50;
  config.num_landmarks = M;
  const fhr::Benchmark bench = fhr::make_benchmark(config, 3);
  const fhr::StabilizerParams params = fhr::init_params(bench.train_z, bench.train_p);

  fhr::StreamState stream(M);
  fhr::Rng rng(5);
  fhr::LandmarkSet z(M);
  for (auto& lm : z) lm = {rng.uniform(100.0, 900.0), rng.uniform(100.0, 900.0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fhr::stabilize_frame(stream, params, z));
  }
}
BENCHMARK(BM_StabilizeFrame)->Arg(7)->Arg(68);

void BM_TotalLoss(benchmark::State& state) {
  fhr::BenchmarkConfig config;
  config.train_videos = 4;
  config.test_videos = 0;
  config.frames = 100;
  const fhr::Benchmark bench = fhr::make_benchmark(config, 7);
  const fhr::StabilizerParams params = fhr::init_params(bench.train_z, bench.train_p);
  const fhr::TrainConfig tc;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fhr::total_loss(params, bench.train_z, bench.train_p, tc));
  }
}
BENCHMARK(BM_TotalLoss);

}  // namespace

BENCHMARK_MAIN();
