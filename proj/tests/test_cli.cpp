#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "fhr/io.hpp"

using namespace fhr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return FHR_CLI_PATH; }

int run(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fhr_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Directory snapshot: file name -> contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      out[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("simulate writes the suite and reruns byte-exactly") {
  const fs::path a = fresh_dir("sim_a");
  const std::string flags =
      " --train-videos 3 --test-videos 2 --frames 20 --num-landmarks 2 --seed 77";
  REQUIRE(run("simulate --out " + a.string() + flags) == 0);
  const auto first = snapshot(a);
  fs::remove_all(a);  // the command recreates missing output directories
  REQUIRE(run("simulate --out " + a.string() + flags) == 0);

  int traj_files = 0, z_files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    if (name.ends_with(".z.json")) {
      ++z_files;
    } else {
      ++traj_files;
    }
  }
  CHECK(traj_files == 5);
  CHECK(z_files == 5);
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(snapshot(a) == first);

  const json manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest.at("tool_version").get<std::string>() == "1.0.0");
  CHECK(manifest.at("seed").get<uint64_t>() == 77);
  CHECK(!manifest.at("config_hash").get<std::string>().empty());
}

TEST_CASE("config file values apply and flags override them") {
  const fs::path dir = fresh_dir("sim_config");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"train_videos": 2, "test_videos": 1, "frames": 15,
                            "num_landmarks": 2, "seed": 5, "out": ")"
                     << (dir / "out_a").string() << R"("})";
  REQUIRE(run("simulate --config " + cfg.string()) == 0);
  CHECK(fs::exists(dir / "out_a" / "train" / "train_001_sinusoid.json"));

  // Flag overrides the configured seed but keeps the rest.
  REQUIRE(run("simulate --config " + cfg.string() + " --out " + (dir / "out_b").string() +
              " --seed 6") == 0);
  const json ma = json::parse(slurp(dir / "out_a" / "manifest.json"));
  const json mb = json::parse(slurp(dir / "out_b" / "manifest.json"));
  CHECK(ma.at("seed").get<int>() == 5);
  CHECK(mb.at("seed").get<int>() == 6);
  CHECK(ma.at("config").at("frames").get<int>() == 15);
  CHECK(mb.at("config").at("frames").get<int>() == 15);
}

TEST_CASE("bad configs exit with code 2") {
  const fs::path dir = fresh_dir("bad_config");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"train_videoz": 2})";  // unknown key
  CHECK(run("simulate --config " + cfg.string()) == 2);
  CHECK(run("nonsense") == 2);
  CHECK(run("decode --num-landmarks 0 --stack missing.fhrs") == 2);
  CHECK(run("stabilize --z foo.json") == 2);  // neither params nor baseline
}

TEST_CASE("encode/decode round-trip through files") {
  const fs::path dir = fresh_dir("codec");
  REQUIRE(run("simulate --out " + (dir / "sim").string() +
              " --train-videos 1 --test-videos 0 --frames 6 --num-landmarks 2 --seed 3") == 0);
  const fs::path traj = dir / "sim" / "train" / "train_000_ramp.json";
  REQUIRE(fs::exists(traj));

  REQUIRE(run("encode --traj " + traj.string() + " --out " + (dir / "enc").string() +
              " --grid-width 128 --grid-height 128 --scale 8 --sigma 3") == 0);
  const fs::path stack = dir / "enc" / "train_000_ramp.fhrs";
  REQUIRE(fs::exists(stack));

  REQUIRE(run("decode --stack " + stack.string() + " --out " + (dir / "dec").string() +
              " --mode fhr --num-landmarks 2") == 0);
  const TrajectorySequence original = read_trajectory(traj);
  const TrajectorySequence decoded = read_trajectory(dir / "dec" / "train_000_ramp.json");
  REQUIRE(decoded.frames.size() == original.frames.size());
  for (size_t t = 0; t < original.frames.size(); ++t) {
    for (size_t m = 0; m < original.frames[t].size(); ++m) {
      CHECK(std::abs(decoded.frames[t][m].x - original.frames[t][m].x) < 1e-6);
      CHECK(std::abs(decoded.frames[t][m].y - original.frames[t][m].y) < 1e-6);
    }
  }

  // chr decode quantizes to the grid.
  REQUIRE(run("decode --stack " + stack.string() + " --out " + (dir / "dec_chr").string() +
              " --mode chr --num-landmarks 2") == 0);
  const TrajectorySequence quantized =
      read_trajectory(dir / "dec_chr" / "train_000_ramp.json");
  bool any_offset = false;
  for (size_t t = 0; t < original.frames.size(); ++t) {
    for (size_t m = 0; m < original.frames[t].size(); ++m) {
      const double r = quantized.frames[t][m].x / 8.0;
      CHECK(std::abs(r - std::round(r)) < 1e-9);  // multiples of the scale
      any_offset |= std::abs(quantized.frames[t][m].x - original.frames[t][m].x) > 1e-6;
    }
  }
  CHECK(any_offset);

  // Corrupted magic bytes are rejected with the data-format exit code.
  std::string bytes = slurp(stack);
  bytes[1] = 'X';
  const fs::path broken = dir / "broken.fhrs";
  std::ofstream(broken, std::ios::binary) << bytes;
  CHECK(run("decode --stack " + broken.string() + " --out " + (dir / "dec_bad").string() +
            " --num-landmarks 2") == 3);
}

TEST_CASE("train then stabilize and evaluate") {
  const fs::path dir = fresh_dir("train_eval");
  REQUIRE(run("simulate --out " + (dir / "sim").string() +
              " --train-videos 2 --test-videos 1 --frames 40 --num-landmarks 2 --seed 11") == 0);

  REQUIRE(run("train --data " + (dir / "sim" / "train").string() + " --out " +
              (dir / "model").string() + " --max-iters 15") == 0);
  CHECK(fs::exists(dir / "model" / "params.json"));
  CHECK(fs::exists(dir / "model" / "config_echo.json"));

  // History CSV exists and is non-increasing in the total column.
  const std::string history = slurp(dir / "model" / "history.csv");
  CHECK(history.rfind("iter,euclidean,time_delay,tm,total\n", 0) == 0);
  double prev = std::numeric_limits<double>::infinity();
  std::istringstream lines(history);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    const double total = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(total <= prev + 1e-12);
    prev = total;
    ++rows;
  }
  CHECK(rows >= 1);

  // Determinism of the whole train command under identical arguments.
  const auto model_snapshot = snapshot(dir / "model");
  fs::remove_all(dir / "model");
  REQUIRE(run("train --data " + (dir / "sim" / "train").string() + " --out " +
              (dir / "model").string() + " --max-iters 15") == 0);
  CHECK(snapshot(dir / "model") == model_snapshot);

  // Stabilize with the trained params and with a baseline.
  const fs::path z_file = dir / "sim" / "test" / "test_000_ramp.z.json";
  REQUIRE(run("stabilize --params " + (dir / "model" / "params.json").string() + " --z " +
              z_file.string() + " --out " + (dir / "stab").string()) == 0);
  CHECK(fs::exists(dir / "stab" / "test_000_ramp.stab.json"));
  REQUIRE(run("stabilize --baseline moving_average:5 --z " + z_file.string() + " --out " +
              (dir / "stab_ma").string()) == 0);

  // Evaluate three methods at once.
  REQUIRE(run("evaluate --data " + (dir / "sim" / "test").string() +
              " --method raw --method baseline:moving_average:5 --method params:" +
              (dir / "model" / "params.json").string() + " --out " +
              (dir / "reports").string()) == 0);
  CHECK(fs::exists(dir / "reports" / "report_raw.json"));
  CHECK(fs::exists(dir / "reports" / "report_baseline_moving_average_5.json"));
  CHECK(fs::exists(dir / "reports" / "frames_raw.csv"));
  const json raw = json::parse(slurp(dir / "reports" / "report_raw.json"));
  CHECK(raw.at("nrmse_percent").get<double>() > 0.0);
  CHECK(raw.at("stability_nrmse_percent").get<double>() > 0.0);

  // Evaluating the ground truth against itself is all zeros.
  const fs::path self_dir = dir / "self";
  fs::create_directories(self_dir);
  fs::copy_file(dir / "sim" / "test" / "test_000_ramp.json", self_dir / "v.json");
  fs::copy_file(dir / "sim" / "test" / "test_000_ramp.json", self_dir / "v.z.json");
  REQUIRE(run("evaluate --data " + self_dir.string() + " --method raw --out " +
              (dir / "self_reports").string()) == 0);
  const json self = json::parse(slurp(dir / "self_reports" / "report_raw.json"));
  CHECK(self.at("nrmse_percent").get<double>() == 0.0);
  CHECK(self.at("stability_nrmse_percent").get<double>() == 0.0);
  CHECK(self.at("auc_percent").get<double>() == 100.0);
}
