#include "fhr/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "fhr/errors.hpp"
#include "fhr/rng.hpp"

namespace fhr {

namespace {

Point2d motion_offset(const MotionSpec& spec, int t) {
  switch (spec.kind) {
    case MotionSpec::Kind::kStatic:
      return {0.0, 0.0};
    case MotionSpec::Kind::kRamp:
      return {spec.vx * t, spec.vy * t};
    case MotionSpec::Kind::kSinusoid:
      return {spec.amplitude *
                  std::sin(2.0 * std::numbers::pi * t / spec.period + spec.phase),
              0.0};
    case MotionSpec::Kind::kBlink: {
      const double phi = std::fmod(static_cast<double>(t), spec.period) / spec.period;
      double pulse = 0.0;
      if (phi < spec.duty) {
        pulse = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phi / spec.duty));
      }
      return {0.0, spec.rest + (spec.peak - spec.rest) * pulse};
    }
    case MotionSpec::Kind::kPiecewise:
      break;  // handled by the caller
  }
  return {0.0, 0.0};
}

void validate_spec(const MotionSpec& spec) {
  // Piecewise clips take their length from the pieces.
  if (spec.kind != MotionSpec::Kind::kPiecewise && spec.frames < 1) {
    throw DomainError("motion must have at least one frame");
  }
  if (!(spec.period > 0.0)) throw DomainError("period must be positive");
  if (!std::isfinite(spec.amplitude)) throw DomainError("amplitude must be finite");
  if (spec.kind == MotionSpec::Kind::kBlink && !(spec.duty > 0.0 && spec.duty <= 1.0)) {
    throw DomainError("blink duty must lie in (0, 1]");
  }
  if (spec.kind == MotionSpec::Kind::kPiecewise) {
    if (spec.pieces.empty()) throw DomainError("piecewise motion needs at least one piece");
    for (const auto& piece : spec.pieces) {
      if (piece.kind == MotionSpec::Kind::kPiecewise) {
        throw DomainError("piecewise motion cannot nest");
      }
      validate_spec(piece);
    }
  }
}

// Offsets for the whole clip, pieces chained end to end.
std::vector<Point2d> all_offsets(const MotionSpec& spec) {
  std::vector<Point2d> offsets;
  if (spec.kind != MotionSpec::Kind::kPiecewise) {
    offsets.reserve(spec.frames);
    for (int t = 0; t < spec.frames; ++t) offsets.push_back(motion_offset(spec, t));
    return offsets;
  }
  Point2d base{0.0, 0.0};
  for (const auto& piece : spec.pieces) {
    for (int t = 0; t < piece.frames; ++t) offsets.push_back(base + motion_offset(piece, t));
    base = offsets.back();
  }
  return offsets;
}

}  // namespace

TrajectorySequence gen_ground_truth(const MotionSpec& spec, uint64_t seed) {
  (void)seed;  // all current motion kinds are deterministic by construction
  validate_spec(spec);
  if (spec.layout.empty()) throw DomainError("motion spec needs an initial layout");

  TrajectorySequence seq;
  seq.norm_distance = spec.norm_distance;
  seq.frame_box = spec.frame_box;
  const auto offsets = all_offsets(spec);
  seq.frames.reserve(offsets.size());
  for (size_t t = 0; t < offsets.size(); ++t) {
    LandmarkSet frame(spec.layout.size());
    for (size_t m = 0; m < frame.size(); ++m) {
      frame[m] = spec.layout[m] + offsets[t];
      if (frame[m].x < 0.0 || frame[m].x > spec.frame_box || frame[m].y < 0.0 ||
          frame[m].y > spec.frame_box) {
        throw DomainError("motion exits the frame box at frame " + std::to_string(t));
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

TrajectorySequence corrupt(const TrajectorySequence& p_seq, const NoiseSpec& noise) {
  if (noise.coordinate_noise_std < 0.0 || noise.outlier_std < 0.0) {
    throw DomainError("noise standard deviations must be non-negative");
  }
  if (noise.outlier_rate < 0.0 || noise.outlier_rate > 1.0) {
    throw DomainError("outlier rate must lie in [0, 1]");
  }
  Rng rng(noise.seed);
  TrajectorySequence z = p_seq;
  for (auto& frame : z.frames) {
    // The outlier coin is always tossed to keep the stream layout fixed.
    const bool outlier = rng.uniform() < noise.outlier_rate;
    const double std = outlier ? noise.outlier_std : noise.coordinate_noise_std;
    for (auto& lm : frame) {
      lm.x += rng.normal(0.0, std);
      lm.y += rng.normal(0.0, std);
    }
  }
  return z;
}

TrajectorySequence pipeline_through_heatmaps(const TrajectorySequence& p_seq,
                                             const GridSpec& grid, DecodeMode mode,
                                             double heatmap_noise_std, uint64_t seed) {
  grid.validate();
  if (heatmap_noise_std < 0.0) throw DomainError("heatmap noise std must be non-negative");
  Rng rng(seed);
  TrajectorySequence z = p_seq;
  for (size_t t = 0; t < p_seq.frames.size(); ++t) {
    HeatmapStack stack = render_heatmaps(p_seq.frames[t], grid, EncodeMode::kFractional);
    if (heatmap_noise_std > 0.0) {
      for (auto& map : stack.maps) {
        for (auto& v : map.values) v += rng.normal(0.0, heatmap_noise_std);
      }
    }
    z.frames[t] = decode_stack(stack, mode);
  }
  return z;
}

namespace {

MotionSpec video_motion(const std::string& kind, const BenchmarkConfig& config, Rng& rng) {
  MotionSpec spec;
  spec.frames = config.frames;
  spec.frame_box = config.frame_box;
  spec.norm_distance = config.norm_distance;

  auto make_ramp = [&](int frames, double max_speed) {
    MotionSpec piece;
    piece.kind = MotionSpec::Kind::kRamp;
    piece.frames = frames;
    const double speed = rng.uniform(0.3, max_speed);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    piece.vx = speed * std::cos(angle);
    piece.vy = speed * std::sin(angle);
    return piece;
  };
  auto make_sinusoid = [&](int frames) {
    MotionSpec piece;
    piece.kind = MotionSpec::Kind::kSinusoid;
    piece.frames = frames;
    piece.amplitude = rng.uniform(5.0, 20.0);
    piece.period = rng.uniform(30.0, 80.0);
    piece.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return piece;
  };
  auto make_blink = [&](int frames) {
    MotionSpec piece;
    piece.kind = MotionSpec::Kind::kBlink;
    piece.frames = frames;
    piece.rest = 0.0;
    piece.peak = rng.uniform(15.0, 35.0);
    piece.duty = rng.uniform(0.1, 0.3);
    piece.period = rng.uniform(40.0, 100.0);
    return piece;
  };

  if (kind == "static") {
    spec.kind = MotionSpec::Kind::kStatic;
  } else if (kind == "ramp") {
    const MotionSpec piece = make_ramp(config.frames, 0.85);
    spec.kind = MotionSpec::Kind::kRamp;
    spec.vx = piece.vx;
    spec.vy = piece.vy;
  } else if (kind == "sinusoid") {
    const MotionSpec piece = make_sinusoid(config.frames);
    spec.kind = MotionSpec::Kind::kSinusoid;
    spec.amplitude = piece.amplitude;
    spec.period = piece.period;
    spec.phase = piece.phase;
  } else if (kind == "blink") {
    const MotionSpec piece = make_blink(config.frames);
    spec.kind = MotionSpec::Kind::kBlink;
    spec.rest = piece.rest;
    spec.peak = piece.peak;
    spec.duty = piece.duty;
    spec.period = piece.period;
  } else if (kind == "piecewise") {
    spec.kind = MotionSpec::Kind::kPiecewise;
    const int quarter = config.frames / 4;
    spec.pieces.push_back(make_ramp(quarter, 0.6));
    spec.pieces.push_back(make_blink(quarter));
    spec.pieces.push_back(make_sinusoid(quarter));
    spec.pieces.push_back(make_ramp(config.frames - 3 * quarter, 0.6));
    spec.frames = config.frames;
  } else {
    throw ConfigError("unknown benchmark motion kind: " + kind);
  }
  return spec;
}

TrajectorySequence benchmark_video(const BenchmarkConfig& config, const std::string& kind,
                                   uint64_t video_seed) {
  Rng rng(video_seed);
  MotionSpec spec = video_motion(kind, config, rng);

  // Layout spread around the box center; ramps travel at most ~0.26 box, so
  // everything stays inside with margin.
  spec.num_landmarks = config.num_landmarks;
  const double c = 0.5 * config.frame_box;
  const double jitter = 0.05 * config.frame_box;
  const double spread = 0.10 * config.frame_box;
  const Point2d center{c + rng.uniform(-jitter, jitter), c + rng.uniform(-jitter, jitter)};
  for (int m = 0; m < config.num_landmarks; ++m) {
    spec.layout.push_back(
        {center.x + rng.uniform(-spread, spread), center.y + rng.uniform(-spread, spread)});
  }
  return gen_ground_truth(spec, video_seed);
}

}  // namespace

Benchmark make_benchmark(const BenchmarkConfig& config, uint64_t seed) {
  if (config.motions.empty() || config.noise_levels.empty()) {
    throw ConfigError("benchmark needs at least one motion kind and one noise level");
  }
  Benchmark bench;
  auto fill = [&](int count, const std::string& tag, uint64_t stream_base,
                  std::vector<TrajectorySequence>& out_p, std::vector<TrajectorySequence>& out_z) {
    char buf[32];
    for (int i = 0; i < count; ++i) {
      const std::string kind = config.motions[i % config.motions.size()];
      const uint64_t video_seed = derive_seed(seed, stream_base + static_cast<uint64_t>(i));
      TrajectorySequence p = benchmark_video(config, kind, video_seed);
      std::snprintf(buf, sizeof(buf), "%s_%03d_", tag.c_str(), i);
      p.video_id = buf + kind;

      NoiseSpec noise;
      noise.coordinate_noise_std = config.noise_levels[i % config.noise_levels.size()];
      noise.outlier_rate = config.outlier_rate;
      noise.outlier_std = config.outlier_std;
      noise.seed = derive_seed(video_seed, 0xC0FFEE);
      TrajectorySequence z = corrupt(p, noise);
      out_p.push_back(std::move(p));
      out_z.push_back(std::move(z));
    }
  };
  fill(config.train_videos, "train", 0, bench.train_p, bench.train_z);
  fill(config.test_videos, "test", 1000, bench.test_p, bench.test_z);
  return bench;
}

}  // namespace fhr
