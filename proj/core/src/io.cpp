#include "fhr/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fhr/errors.hpp"
#include "fhr/metrics.hpp"

namespace fhr {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'F', 'H', 'R', 'S'};
constexpr uint16_t kStackVersion = 1;

void put_bytes(std::string& out, uint64_t value, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double value) {
  put_bytes(out, std::bit_cast<uint64_t>(value), 8);
}

class Reader {
 public:
  Reader(const std::string& data, const std::filesystem::path& path)
      : data_(data), path_(path) {}

  uint64_t take(int n) {
    if (pos_ + n > data_.size()) {
      throw FormatError(path_.string() + ": truncated at offset " + std::to_string(pos_));
    }
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  double take_f64() { return std::bit_cast<double>(take(8)); }
  size_t pos() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  const std::filesystem::path& path_;
  size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError("failed while writing " + path.string());
}

json parse_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_heatmap_stack(const std::filesystem::path& path, const HeatmapStack& stack) {
  stack.grid.validate();
  std::string out;
  const size_t per_map = static_cast<size_t>(stack.grid.width) * stack.grid.height;
  out.reserve(30 + stack.maps.size() * per_map * 8);
  out.append(kMagic, 4);
  put_bytes(out, kStackVersion, 2);
  put_bytes(out, static_cast<uint32_t>(stack.grid.width), 4);
  put_bytes(out, static_cast<uint32_t>(stack.grid.height), 4);
  put_bytes(out, static_cast<uint32_t>(stack.maps.size()), 4);
  put_f64(out, stack.grid.sigma);
  put_f64(out, stack.grid.scale);
  for (const auto& map : stack.maps) {
    if (map.width != stack.grid.width || map.height != stack.grid.height) {
      throw ShapeError("heatmap dimensions do not match the stack grid");
    }
    for (const double v : map.values) put_f64(out, v);
  }
  write_file(path, out);
}

HeatmapStack read_heatmap_stack(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  Reader r(data, path);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.take(1));
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad magic bytes at offset 0");
  }
  const auto version = static_cast<uint16_t>(r.take(2));
  if (version != kStackVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  }
  HeatmapStack stack;
  stack.grid.width = static_cast<int>(r.take(4));
  stack.grid.height = static_cast<int>(r.take(4));
  const auto num_maps = static_cast<uint32_t>(r.take(4));
  stack.grid.sigma = r.take_f64();
  stack.grid.scale = r.take_f64();
  try {
    stack.grid.validate();
  } catch (const DomainError& e) {
    throw FormatError(path.string() + ": invalid grid header: " + e.what());
  }
  const size_t per_map = static_cast<size_t>(stack.grid.width) * stack.grid.height;
  if (r.remaining() != num_maps * per_map * 8) {
    throw FormatError(path.string() + ": payload size mismatch at offset " +
                      std::to_string(r.pos()) + " (expected " +
                      std::to_string(num_maps * per_map * 8) + " bytes, found " +
                      std::to_string(r.remaining()) + ")");
  }
  stack.maps.reserve(num_maps);
  for (uint32_t m = 0; m < num_maps; ++m) {
    Heatmap map(stack.grid.width, stack.grid.height);
    for (size_t i = 0; i < per_map; ++i) map.values[i] = r.take_f64();
    stack.maps.push_back(std::move(map));
  }
  return stack;
}

void write_trajectory(const std::filesystem::path& path, const TrajectorySequence& seq) {
  json frames = json::array();
  for (const auto& frame : seq.frames) {
    json f = json::array();
    for (const auto& lm : frame) f.push_back({lm.x, lm.y});
    frames.push_back(std::move(f));
  }
  const json j = {{"video_id", seq.video_id},
                  {"num_landmarks", seq.num_landmarks()},
                  {"norm_distance", seq.norm_distance},
                  {"frame_box", seq.frame_box},
                  {"frames", std::move(frames)}};
  write_file(path, dump_json(j));
}

TrajectorySequence read_trajectory(const std::filesystem::path& path) {
  const json j = parse_json(path);
  try {
    TrajectorySequence seq;
    seq.video_id = j.at("video_id").get<std::string>();
    seq.norm_distance = j.at("norm_distance").get<double>();
    seq.frame_box = j.at("frame_box").get<double>();
    const int M = j.at("num_landmarks").get<int>();
    for (const auto& f : j.at("frames")) {
      LandmarkSet frame;
      frame.reserve(f.size());
      for (const auto& lm : f) frame.push_back({lm.at(0).get<double>(), lm.at(1).get<double>()});
      if (static_cast<int>(frame.size()) != M) {
        throw FormatError(path.string() + ": frame landmark count differs from num_landmarks");
      }
      seq.frames.push_back(std::move(frame));
    }
    return seq;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_params(const std::filesystem::path& path, const StabilizerParams& params) {
  params.validate();
  json gamma_k = json::array();
  for (const auto& g : params.gamma_k) {
    gamma_k.push_back(std::vector<double>(g.begin(), g.end()));
  }
  std::vector<double> v_flat;
  v_flat.reserve(static_cast<size_t>(params.V.size()));
  for (Eigen::Index r = 0; r < params.V.rows(); ++r) {
    for (Eigen::Index c = 0; c < params.V.cols(); ++c) v_flat.push_back(params.V(r, c));
  }
  const json j = {{"K", params.K},
                  {"gamma", params.gamma},
                  {"alpha", std::vector<double>(params.alpha.begin(), params.alpha.end())},
                  {"beta", std::vector<double>(params.beta.begin(), params.beta.end())},
                  {"gamma_noise_diag",
                   std::vector<double>(params.gamma_noise.begin(), params.gamma_noise.end())},
                  {"gamma_k_diag", std::move(gamma_k)},
                  {"V", std::move(v_flat)},
                  {"M", params.M},
                  {"mode", to_string(params.mode)}};
  write_file(path, dump_json(j));
}

StabilizerParams read_params(const std::filesystem::path& path) {
  const json j = parse_json(path);
  StabilizerParams params;
  try {
    params.K = j.at("K").get<int>();
    params.M = j.at("M").get<int>();
    params.gamma = j.at("gamma").get<double>();
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    const auto beta = j.at("beta").get<std::vector<double>>();
    params.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());
    params.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
    const auto noise = j.at("gamma_noise_diag").get<std::vector<double>>();
    params.gamma_noise = Eigen::Map<const Eigen::VectorXd>(noise.data(), noise.size());
    for (const auto& g : j.at("gamma_k_diag")) {
      const auto diag = g.get<std::vector<double>>();
      params.gamma_k.push_back(Eigen::Map<const Eigen::VectorXd>(diag.data(), diag.size()));
    }
    const auto v_flat = j.at("V").get<std::vector<double>>();
    const int n = 2 * params.M;
    if (static_cast<int>(v_flat.size()) != n * n) {
      throw FormatError(path.string() + ": V must hold (2M)^2 row-major entries");
    }
    params.V = Eigen::MatrixXd(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) params.V(r, c) = v_flat[static_cast<size_t>(r) * n + c];
    }
    params.mode = stabilizer_mode_from_string(j.at("mode").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    params.validate();
  } catch (const Error& e) {
    throw FormatError(path.string() + ": invalid parameters: " + e.what());
  }
  return params;
}

void write_loss_history_csv(const std::filesystem::path& path,
                            const std::vector<HistoryRow>& history) {
  std::string out = "iter,euclidean,time_delay,tm,total\n";
  for (const auto& row : history) {
    out += std::to_string(row.iter);
    out += ',';
    out += format_double(row.reg_euclidean);
    out += ',';
    out += format_double(row.reg_time_delay);
    out += ',';
    out += format_double(row.tm_smooth);
    out += ',';
    out += format_double(row.total);
    out += '\n';
  }
  write_file(path, out);
}

void write_metrics_report(const std::filesystem::path& path, const MetricsReport& report) {
  const json j = {{"nrmse_percent", report.nrmse_percent},
                  {"auc_percent", report.auc_percent},
                  {"failure_rate_percent", report.failure_rate_percent},
                  {"stability_nrmse_percent", report.stability_nrmse_percent},
                  {"per_landmark_magnitude", report.per_landmark_magnitude},
                  {"per_landmark_orientation_deg", report.per_landmark_orientation_deg},
                  {"lag_frames", report.lag_frames}};
  write_file(path, dump_json(j));
}

void write_per_frame_csv(const std::filesystem::path& path,
                         const std::vector<TrajectorySequence>& x_seqs,
                         const std::vector<TrajectorySequence>& p_seqs) {
  if (x_seqs.size() != p_seqs.size()) throw ShapeError("sequence collections must align");
  std::string out = "video,frame,nrmse,stability\n";
  for (size_t i = 0; i < x_seqs.size(); ++i) {
    const auto frames = per_frame_nrmse(x_seqs[i], p_seqs[i], p_seqs[i].norm_distance);
    for (size_t t = 0; t < frames.size(); ++t) {
      out += p_seqs[i].video_id;
      out += ',';
      out += std::to_string(t);
      out += ',';
      out += format_double(frames[t]);
      out += ',';
      if (t >= 1) {
        double acc = 0.0;
        const auto& xc = x_seqs[i].frames[t];
        const auto& xp = x_seqs[i].frames[t - 1];
        const auto& pc = p_seqs[i].frames[t];
        const auto& pp = p_seqs[i].frames[t - 1];
        for (size_t m = 0; m < xc.size(); ++m) {
          acc += ((xc[m] - xp[m]) - (pc[m] - pp[m])).norm();
        }
        acc = acc / static_cast<double>(xc.size()) / p_seqs[i].norm_distance * 100.0;
        out += format_double(acc);
      }
      out += '\n';
    }
  }
  write_file(path, out);
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace fhr
