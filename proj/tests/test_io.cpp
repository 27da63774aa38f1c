#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "fhr/io.hpp"
#include "fhr/heatmap_codec.hpp"
#include "fhr/rng.hpp"
#include "fhr/synth.hpp"
#include "fhr/training.hpp"

using namespace fhr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "fhr_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("heatmap stack files round-trip bit-exactly") {
  Rng rng(21);
  HeatmapStack stack;
  stack.grid = {16, 12, 2.5, 3.0};
  for (int m = 0; m < 3; ++m) {
    Heatmap h(16, 12);
    for (auto& v : h.values) v = rng.normal(0.0, 1.0);
    stack.maps.push_back(std::move(h));
  }
  const fs::path path = temp_dir() / "stack.fhrs";
  write_heatmap_stack(path, stack);
  const HeatmapStack back = read_heatmap_stack(path);

  CHECK(back.grid.width == stack.grid.width);
  CHECK(back.grid.height == stack.grid.height);
  CHECK(back.grid.sigma == stack.grid.sigma);
  CHECK(back.grid.scale == stack.grid.scale);
  REQUIRE(back.maps.size() == stack.maps.size());
  for (size_t m = 0; m < stack.maps.size(); ++m) {
    REQUIRE(back.maps[m].values.size() == stack.maps[m].values.size());
    CHECK(std::memcmp(back.maps[m].values.data(), stack.maps[m].values.data(),
                      stack.maps[m].values.size() * sizeof(double)) == 0);
  }

  // Writing the identical stack again produces identical bytes.
  const fs::path path2 = temp_dir() / "stack2.fhrs";
  write_heatmap_stack(path2, back);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("corrupt or truncated stack files are rejected") {
  const fs::path dir = temp_dir();
  HeatmapStack stack;
  stack.grid = {8, 8, 1.0, 3.0};
  stack.maps.emplace_back(8, 8);
  const fs::path path = dir / "bad.fhrs";
  write_heatmap_stack(path, stack);

  std::string data = slurp(path);
  {
    std::string broken = data;
    broken[0] = 'X';
    std::ofstream(dir / "magic.fhrs", std::ios::binary) << broken;
    CHECK_THROWS_AS(read_heatmap_stack(dir / "magic.fhrs"), FormatError);
  }
  {
    std::ofstream(dir / "trunc.fhrs", std::ios::binary)
        << data.substr(0, data.size() - 5);
    CHECK_THROWS_AS(read_heatmap_stack(dir / "trunc.fhrs"), FormatError);
  }
  {
    std::string broken = data;
    broken[4] = 9;  // unsupported version
    std::ofstream(dir / "ver.fhrs", std::ios::binary) << broken;
    CHECK_THROWS_AS(read_heatmap_stack(dir / "ver.fhrs"), FormatError);
  }
}

TEST_CASE("trajectory JSON round-trips") {
  BenchmarkConfig config;
  config.train_videos = 1;
  config.test_videos = 0;
  config.frames = 10;
  const Benchmark bench = make_benchmark(config, 5);
  const fs::path path = temp_dir() / "traj.json";
  write_trajectory(path, bench.train_p[0]);
  const TrajectorySequence back = read_trajectory(path);
  CHECK(back.video_id == bench.train_p[0].video_id);
  CHECK(back.norm_distance == bench.train_p[0].norm_distance);
  CHECK(back.frame_box == bench.train_p[0].frame_box);
  REQUIRE(back.frames.size() == bench.train_p[0].frames.size());
  for (size_t t = 0; t < back.frames.size(); ++t) {
    for (size_t m = 0; m < back.frames[t].size(); ++m) {
      CHECK(back.frames[t][m].x == bench.train_p[0].frames[t][m].x);
      CHECK(back.frames[t][m].y == bench.train_p[0].frames[t][m].y);
    }
  }
}

TEST_CASE("params JSON round-trips bit-exactly and validates on read") {
  BenchmarkConfig config;
  config.train_videos = 2;
  config.test_videos = 0;
  config.frames = 30;
  config.num_landmarks = 3;
  const Benchmark bench = make_benchmark(config, 9);
  const StabilizerParams params = init_params(bench.train_z, bench.train_p);

  const fs::path path = temp_dir() / "params.json";
  write_params(path, params);
  const StabilizerParams back = read_params(path);
  CHECK(back.K == params.K);
  CHECK(back.M == params.M);
  CHECK(back.gamma == params.gamma);
  CHECK(back.alpha == params.alpha);
  CHECK(back.beta == params.beta);
  CHECK(back.gamma_noise == params.gamma_noise);
  for (int k = 0; k < params.K; ++k) CHECK(back.gamma_k[k] == params.gamma_k[k]);
  CHECK(back.V == params.V);
  CHECK(back.mode == params.mode);

  // A well-formed file with a non-orthonormal V is rejected as bad data.
  StabilizerParams broken = params;
  broken.V(0, 0) += 0.5;
  const fs::path bad = temp_dir() / "params_bad.json";
  CHECK_THROWS_AS(write_params(bad, broken), DomainError);
  // Bypass write-side validation by editing the good file.
  std::string text = slurp(path);
  const auto pos = text.find("\"gamma\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 8, "\"gamm_\"");
  std::ofstream(bad) << text;
  CHECK_THROWS_AS(read_params(bad), FormatError);
}

TEST_CASE("fnv1a64 is stable") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
  CHECK(fnv1a64("hello") == fnv1a64("hello"));
  CHECK(fnv1a64("hello") != fnv1a64("hellp"));
}
