// fhr: synthetic landmark experiments end to end.
//
//   fhr simulate  - generate a benchmark of ground-truth and detector videos
//   fhr encode    - render trajectories into heatmap-stack binaries
//   fhr decode    - decode heatmap stacks back to trajectories (fhr or chr)
//   fhr train     - fit stabilizer parameters on paired videos
//   fhr stabilize - run a params file or a baseline smoother over videos
//   fhr evaluate  - accuracy/stability reports for methods vs ground truth
//
// Every command accepts --config FILE (JSON). Keys mirror the long option
// names with underscores; explicit flags override config values. Outputs are
// deterministic given the same config and seed, and each command writes a
// manifest.json recording the tool version, config hash and seed.
//
// Exit codes: 0 success, 2 config error, 3 data-format error, 4 numerical
// failure.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fhr/baselines.hpp"
#include "fhr/errors.hpp"
#include "fhr/heatmap_codec.hpp"
#include "fhr/io.hpp"
#include "fhr/metrics.hpp"
#include "fhr/stabilizer.hpp"
#include "fhr/synth.hpp"
#include "fhr/training.hpp"
#include "fhr/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigSource {
  json values = json::object();

  static ConfigSource load(const std::string& path) {
    ConfigSource src;
    if (path.empty()) return src;
    std::ifstream in(path);
    if (!in) throw fhr::ConfigError("cannot open config file " + path);
    try {
      src.values = json::parse(in);
    } catch (const json::exception& e) {
      throw fhr::ConfigError("config file " + path + ": " + e.what());
    }
    if (!src.values.is_object()) throw fhr::ConfigError("config file must hold a JSON object");
    return src;
  }

  template <typename T>
  void get(const std::string& key, T& field) {
    if (!values.contains(key)) return;
    try {
      field = values.at(key).get<T>();
    } catch (const json::exception& e) {
      throw fhr::ConfigError("config key '" + key + "': " + e.what());
    }
    consumed.insert(key);
  }

  void finish() const {
    for (const auto& [key, value] : values.items()) {
      if (!consumed.contains(key)) throw fhr::ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  std::set<std::string> consumed;
};

// Returns true when parsing should stop the command (help printed or bad
// flags); `code` carries the exit status.
bool parse_args(CLI::App& app, std::vector<std::string> args, int& code) {
  try {
    app.parse(std::move(args));
    return false;
  } catch (const CLI::ParseError& e) {
    code = app.exit(e) == 0 ? 0 : 2;
    return true;
  }
}

std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return "";
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw fhr::FormatError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// Shared manifest: version, command, config echo + hash, seed, output list.
void write_manifest(const fs::path& dir, const std::string& command, const json& config_echo,
                    uint64_t seed, std::vector<std::string> outputs) {
  std::sort(outputs.begin(), outputs.end());
  const json manifest = {{"tool_version", fhr::kVersion},
                         {"command", command},
                         {"config", config_echo},
                         {"config_hash", hex64(fhr::fnv1a64(config_echo.dump()))},
                         {"seed", seed},
                         {"outputs", std::move(outputs)}};
  write_json_file(dir / "manifest.json", manifest);
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw fhr::ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Paired ground-truth and detector videos: X.json plus X.z.json.
struct PairedVideos {
  std::vector<fhr::TrajectorySequence> p, z;
};

PairedVideos load_pairs(const fs::path& dir) {
  PairedVideos out;
  for (const auto& path : sorted_files(dir, ".json")) {
    const std::string name = path.filename().string();
    if (name == "manifest.json" || name.ends_with(".z.json")) continue;
    fs::path z_path = path;
    z_path.replace_extension();  // drop .json
    z_path += ".z.json";
    if (!fs::exists(z_path)) {
      throw fhr::ConfigError("missing detector file " + z_path.string() + " for " +
                             path.string());
    }
    out.p.push_back(fhr::read_trajectory(path));
    out.z.push_back(fhr::read_trajectory(z_path));
  }
  if (out.p.empty()) throw fhr::ConfigError("no video pairs found in " + dir.string());
  return out;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(ConfigSource& config, const std::vector<std::string>& args) {
  fhr::BenchmarkConfig bench;
  std::string out_dir = "benchmark";
  uint64_t seed = 2024;

  config.get("out", out_dir);
  config.get("seed", seed);
  config.get("train_videos", bench.train_videos);
  config.get("test_videos", bench.test_videos);
  config.get("frames", bench.frames);
  config.get("num_landmarks", bench.num_landmarks);
  config.get("frame_box", bench.frame_box);
  config.get("norm_distance", bench.norm_distance);
  config.get("motions", bench.motions);
  config.get("noise_levels", bench.noise_levels);
  config.get("outlier_rate", bench.outlier_rate);
  config.get("outlier_std", bench.outlier_std);
  config.finish();

  CLI::App app{"generate a synthetic benchmark"};
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--train-videos", bench.train_videos);
  app.add_option("--test-videos", bench.test_videos);
  app.add_option("--frames", bench.frames);
  app.add_option("--num-landmarks", bench.num_landmarks);
  app.add_option("--frame-box", bench.frame_box);
  app.add_option("--norm-distance", bench.norm_distance);
  app.add_option("--noise-levels", bench.noise_levels)->expected(-1);
  app.add_option("--outlier-rate", bench.outlier_rate);
  app.add_option("--outlier-std", bench.outlier_std);
  int code = 0;
  if (parse_args(app, args, code)) return code;

  const fhr::Benchmark suite = fhr::make_benchmark(bench, seed);

  const fs::path root(out_dir);
  fs::create_directories(root / "train");
  fs::create_directories(root / "test");
  std::vector<std::string> outputs;
  auto dump_set = [&](const std::vector<fhr::TrajectorySequence>& ps,
                      const std::vector<fhr::TrajectorySequence>& zs, const std::string& sub) {
    for (size_t i = 0; i < ps.size(); ++i) {
      const std::string p_name = sub + "/" + ps[i].video_id + ".json";
      const std::string z_name = sub + "/" + ps[i].video_id + ".z.json";
      fhr::write_trajectory(root / p_name, ps[i]);
      fhr::write_trajectory(root / z_name, zs[i]);
      outputs.push_back(p_name);
      outputs.push_back(z_name);
    }
  };
  dump_set(suite.train_p, suite.train_z, "train");
  dump_set(suite.test_p, suite.test_z, "test");

  const json echo = {{"out", out_dir},
                     {"seed", seed},
                     {"train_videos", bench.train_videos},
                     {"test_videos", bench.test_videos},
                     {"frames", bench.frames},
                     {"num_landmarks", bench.num_landmarks},
                     {"frame_box", bench.frame_box},
                     {"norm_distance", bench.norm_distance},
                     {"motions", bench.motions},
                     {"noise_levels", bench.noise_levels},
                     {"outlier_rate", bench.outlier_rate},
                     {"outlier_std", bench.outlier_std}};
  write_manifest(root, "simulate", echo, seed, std::move(outputs));
  return 0;
}

// ---------------------------------------------------------------------------
// encode / decode

int cmd_encode(ConfigSource& config, const std::vector<std::string>& args) {
  std::vector<std::string> traj_files;
  std::string out_dir = "encoded";
  fhr::GridSpec grid{128, 128, 8.0, 3.0};
  std::string mode = "fractional";

  config.get("traj", traj_files);
  config.get("out", out_dir);
  config.get("grid_width", grid.width);
  config.get("grid_height", grid.height);
  config.get("scale", grid.scale);
  config.get("sigma", grid.sigma);
  config.get("mode", mode);
  config.finish();

  CLI::App app{"render trajectories into heatmap stacks"};
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--traj", traj_files, "trajectory JSON files")->expected(-1);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--grid-width", grid.width);
  app.add_option("--grid-height", grid.height);
  app.add_option("--scale", grid.scale);
  app.add_option("--sigma", grid.sigma);
  app.add_option("--mode", mode)->check(CLI::IsMember({"fractional", "rounded"}));
  int code = 0;
  if (parse_args(app, args, code)) return code;

  if (traj_files.empty()) throw fhr::ConfigError("encode needs at least one --traj file");
  const fhr::EncodeMode encode_mode =
      mode == "fractional" ? fhr::EncodeMode::kFractional : fhr::EncodeMode::kRounded;

  const fs::path root(out_dir);
  fs::create_directories(root);
  std::vector<std::string> outputs;
  for (const auto& file : traj_files) {
    const fhr::TrajectorySequence seq = fhr::read_trajectory(file);
    fhr::HeatmapStack all;
    all.grid = grid;
    for (const auto& frame : seq.frames) {
      fhr::HeatmapStack stack = fhr::render_heatmaps(frame, grid, encode_mode);
      for (auto& map : stack.maps) all.maps.push_back(std::move(map));
    }
    const std::string name = fs::path(file).stem().string() + ".fhrs";
    fhr::write_heatmap_stack(root / name, all);
    outputs.push_back(name);
  }

  const json echo = {{"traj", traj_files},   {"out", out_dir},
                     {"grid_width", grid.width}, {"grid_height", grid.height},
                     {"scale", grid.scale},  {"sigma", grid.sigma},
                     {"mode", mode}};
  write_manifest(root, "encode", echo, 0, std::move(outputs));
  return 0;
}

int cmd_decode(ConfigSource& config, const std::vector<std::string>& args) {
  std::vector<std::string> stack_files;
  std::string out_dir = "decoded";
  std::string mode = "fhr";
  int num_landmarks = 0;
  double norm_distance = 100.0;
  double frame_box = 1024.0;

  config.get("stack", stack_files);
  config.get("out", out_dir);
  config.get("mode", mode);
  config.get("num_landmarks", num_landmarks);
  config.get("norm_distance", norm_distance);
  config.get("frame_box", frame_box);
  config.finish();

  CLI::App app{"decode heatmap stacks to trajectories"};
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--stack", stack_files, "heatmap stack files")->expected(-1);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--mode", mode)->check(CLI::IsMember({"fhr", "chr"}));
  app.add_option("--num-landmarks", num_landmarks, "landmarks per frame");
  app.add_option("--norm-distance", norm_distance);
  app.add_option("--frame-box", frame_box);
  int code = 0;
  if (parse_args(app, args, code)) return code;

  if (stack_files.empty()) throw fhr::ConfigError("decode needs at least one --stack file");
  if (num_landmarks < 1) throw fhr::ConfigError("--num-landmarks must be at least 1");
  const fhr::DecodeMode decode_mode =
      mode == "fhr" ? fhr::DecodeMode::kFhr : fhr::DecodeMode::kChr;

  const fs::path root(out_dir);
  fs::create_directories(root);
  std::vector<std::string> outputs;
  for (const auto& file : stack_files) {
    const fhr::HeatmapStack all = fhr::read_heatmap_stack(file);
    if (all.maps.size() % static_cast<size_t>(num_landmarks) != 0) {
      throw fhr::FormatError(file + ": map count " + std::to_string(all.maps.size()) +
                             " is not a multiple of " + std::to_string(num_landmarks));
    }
    fhr::TrajectorySequence seq;
    seq.video_id = fs::path(file).stem().string();
    seq.norm_distance = norm_distance;
    seq.frame_box = frame_box;
    fhr::HeatmapStack frame_stack;
    frame_stack.grid = all.grid;
    for (size_t m = 0; m < all.maps.size(); m += num_landmarks) {
      frame_stack.maps.assign(all.maps.begin() + m, all.maps.begin() + m + num_landmarks);
      seq.frames.push_back(fhr::decode_stack(frame_stack, decode_mode));
    }
    const std::string name = seq.video_id + ".json";
    fhr::write_trajectory(root / name, seq);
    outputs.push_back(name);
  }

  const json echo = {{"stack", stack_files},        {"out", out_dir},
                     {"mode", mode},                {"num_landmarks", num_landmarks},
                     {"norm_distance", norm_distance}, {"frame_box", frame_box}};
  write_manifest(root, "decode", echo, 0, std::move(outputs));
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(ConfigSource& config, const std::vector<std::string>& args) {
  std::string data_dir;
  std::string out_dir = "trained";
  std::string mode = "map-candidates";
  fhr::TrainConfig tc;

  config.get("data", data_dir);
  config.get("out", out_dir);
  config.get("lambda1", tc.lambda1);
  config.get("lambda2", tc.lambda2);
  config.get("lambda3", tc.lambda3);
  config.get("max_iters", tc.max_iters);
  config.get("x_tol", tc.x_tol);
  config.get("f_tol", tc.f_tol);
  config.get("seed", tc.seed);
  config.get("tie_groups", tc.tie_groups);
  config.get("mode", mode);
  config.finish();

  CLI::App app{"fit stabilizer parameters"};
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--data", data_dir, "directory of paired videos (X.json + X.z.json)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--lambda1", tc.lambda1, "smoothness weight");
  app.add_option("--lambda2", tc.lambda2, "time-delay weight");
  app.add_option("--lambda3", tc.lambda3, "line-vs-midpoint trade-off");
  app.add_option("--max-iters", tc.max_iters);
  app.add_option("--x-tol", tc.x_tol);
  app.add_option("--f-tol", tc.f_tol);
  app.add_option("--seed", tc.seed);
  app.add_option("--tie-groups", tc.tie_groups, "diagonal tying groups (0 = untied)");
  app.add_option("--mode", mode)->check(CLI::IsMember({"map-candidates", "posterior-mean"}));
  int code = 0;
  if (parse_args(app, args, code)) return code;

  if (data_dir.empty()) throw fhr::ConfigError("train needs --data");
  const PairedVideos videos = load_pairs(data_dir);

  fhr::StabilizerParams params0 = fhr::init_params(videos.z, videos.p);
  params0.mode = fhr::stabilizer_mode_from_string(mode);
  const fhr::FitResult result = fhr::fit(params0, videos.z, videos.p, tc);

  const fs::path root(out_dir);
  fs::create_directories(root);
  fhr::write_params(root / "params.json", result.params);
  fhr::write_loss_history_csv(root / "history.csv", result.history);

  const json echo = {{"data", data_dir},       {"out", out_dir},
                     {"lambda1", tc.lambda1},  {"lambda2", tc.lambda2},
                     {"lambda3", tc.lambda3},  {"max_iters", tc.max_iters},
                     {"x_tol", tc.x_tol},      {"f_tol", tc.f_tol},
                     {"seed", tc.seed},        {"tie_groups", tc.tie_groups},
                     {"mode", mode}};
  write_json_file(root / "config_echo.json", echo);
  write_manifest(root, "train", echo, tc.seed,
                 {"params.json", "history.csv", "config_echo.json"});

  std::cout << "final loss: total=" << result.final_loss.total
            << " euclidean=" << result.final_loss.reg_euclidean
            << " time_delay=" << result.final_loss.reg_time_delay
            << " tm=" << result.final_loss.tm_smooth << " (" << result.iterations
            << " iterations, " << result.evaluations << " evaluations, "
            << result.stop_reason << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// stabilize

int cmd_stabilize(ConfigSource& config, const std::vector<std::string>& args) {
  std::vector<std::string> z_files;
  std::string params_file;
  std::string baseline_spec;
  std::string out_dir = "stabilized";

  config.get("z", z_files);
  config.get("params", params_file);
  config.get("baseline", baseline_spec);
  config.get("out", out_dir);
  config.finish();

  CLI::App app{"smooth detector trajectories"};
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--z", z_files, "detector trajectory files")->expected(-1);
  app.add_option("--params", params_file, "stabilizer params JSON");
  app.add_option("--baseline", baseline_spec, "baseline kind[:param]");
  app.add_option("--out", out_dir, "output directory");
  int code = 0;
  if (parse_args(app, args, code)) return code;

  if (z_files.empty()) throw fhr::ConfigError("stabilize needs at least one --z file");
  if (params_file.empty() == baseline_spec.empty()) {
    throw fhr::ConfigError("choose exactly one of --params or --baseline");
  }

  const fs::path root(out_dir);
  fs::create_directories(root);
  std::vector<std::string> outputs;
  for (const auto& file : z_files) {
    const fhr::TrajectorySequence z = fhr::read_trajectory(file);
    fhr::TrajectorySequence x;
    if (!params_file.empty()) {
      x = fhr::stabilize_sequence(fhr::read_params(params_file), z);
    } else {
      x = fhr::apply_baseline(fhr::parse_baseline(baseline_spec), z);
    }
    std::string stem = fs::path(file).stem().string();
    if (stem.ends_with(".z")) stem.resize(stem.size() - 2);
    const std::string name = stem + ".stab.json";
    fhr::write_trajectory(root / name, x);
    outputs.push_back(name);
  }

  const json echo = {{"z", z_files},
                     {"params", params_file},
                     {"baseline", baseline_spec},
                     {"out", out_dir}};
  write_manifest(root, "stabilize", echo, 0, std::move(outputs));
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

std::string sanitize_tag(const std::string& method) {
  std::string tag;
  for (const char c : method) {
    tag += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  }
  return tag;
}

int cmd_evaluate(ConfigSource& config, const std::vector<std::string>& args) {
  std::string data_dir;
  std::string out_dir = "reports";
  std::vector<std::string> methods = {"raw"};

  config.get("data", data_dir);
  config.get("out", out_dir);
  config.get("methods", methods);
  config.finish();

  CLI::App app{"evaluate methods against ground truth"};
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--data", data_dir, "directory of paired videos (X.json + X.z.json)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--method", methods,
                 "raw | baseline:kind[:param] | params:file (repeatable)")
      ->expected(-1);
  int code = 0;
  if (parse_args(app, args, code)) return code;

  if (data_dir.empty()) throw fhr::ConfigError("evaluate needs --data");
  const PairedVideos videos = load_pairs(data_dir);

  const fs::path root(out_dir);
  fs::create_directories(root);
  std::vector<std::string> outputs;
  for (const auto& method : methods) {
    std::vector<fhr::TrajectorySequence> x_seqs;
    if (method == "raw") {
      x_seqs = videos.z;
    } else if (method.rfind("baseline:", 0) == 0) {
      const fhr::BaselineKind kind = fhr::parse_baseline(method.substr(9));
      for (const auto& z : videos.z) x_seqs.push_back(fhr::apply_baseline(kind, z));
    } else if (method.rfind("params:", 0) == 0) {
      const fhr::StabilizerParams params = fhr::read_params(method.substr(7));
      for (const auto& z : videos.z) x_seqs.push_back(fhr::stabilize_sequence(params, z));
    } else {
      throw fhr::ConfigError("unknown method '" + method + "'");
    }
    const fhr::MetricsReport report = fhr::evaluate_metrics(x_seqs, videos.p);
    const std::string tag = sanitize_tag(method);
    fhr::write_metrics_report(root / ("report_" + tag + ".json"), report);
    fhr::write_per_frame_csv(root / ("frames_" + tag + ".csv"), x_seqs, videos.p);
    outputs.push_back("report_" + tag + ".json");
    outputs.push_back("frames_" + tag + ".csv");
    std::cout << method << ": nrmse=" << report.nrmse_percent
              << "% stability=" << report.stability_nrmse_percent
              << "% auc=" << report.auc_percent << "% failure=" << report.failure_rate_percent
              << "% lag=" << report.lag_frames << "\n";
  }

  const json echo = {{"data", data_dir}, {"out", out_dir}, {"methods", methods}};
  write_manifest(root, "evaluate", echo, 0, std::move(outputs));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> commands = {"simulate", "encode", "decode",
                                             "train",    "stabilize", "evaluate"};
  auto usage = [&] {
    std::cerr << "usage: fhr <command> [options]\ncommands:";
    for (const auto& c : commands) std::cerr << " " << c;
    std::cerr << "\nrun 'fhr <command> --help' for options\n";
  };

  if (argc < 2) {
    usage();
    return 2;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    usage();
    return 0;
  }
  if (command == "--version") {
    std::cout << "fhr " << fhr::kVersion << "\n";
    return 0;
  }

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 2; --i) args.emplace_back(argv[i]);  // CLI11 parses reversed

  try {
    ConfigSource config = ConfigSource::load(find_config_arg(argc, argv));
    if (command == "simulate") return cmd_simulate(config, args);
    if (command == "encode") return cmd_encode(config, args);
    if (command == "decode") return cmd_decode(config, args);
    if (command == "train") return cmd_train(config, args);
    if (command == "stabilize") return cmd_stabilize(config, args);
    if (command == "evaluate") return cmd_evaluate(config, args);
    std::cerr << "unknown command '" << command << "'\n";
    usage();
    return 2;
  } catch (const fhr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fhr::FormatError& e) {
    std::cerr << "data format error: " << e.what() << "\n";
    return 3;
  } catch (const fhr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
