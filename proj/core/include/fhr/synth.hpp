#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fhr/geometry.hpp"
#include "fhr/heatmap_codec.hpp"

namespace fhr {

// Synthetic rigid motion applied to every landmark of the layout.
//   kStatic:   no movement.
//   kRamp:     constant velocity (vx, vy) px/frame.
//   kSinusoid: horizontal oscillation amplitude * sin(2 pi t / period + phase).
//   kBlink:    vertical pulse from `rest` to `peak` during the first `duty`
//              fraction of each period, smoothed by a raised cosine.
//   kPiecewise: pieces played back to back, each starting where the previous
//              one ended.
struct MotionSpec {
  enum class Kind { kStatic, kRamp, kSinusoid, kBlink, kPiecewise };

  Kind kind = Kind::kStatic;
  int frames = 1;

  double vx = 0.0, vy = 0.0;                      // ramp
  double amplitude = 0.0, period = 1.0, phase = 0.0;  // sinusoid; period also paces blink
  double rest = 0.0, peak = 0.0, duty = 0.2;      // blink
  std::vector<MotionSpec> pieces;                 // piecewise segments

  int num_landmarks = 1;
  LandmarkSet layout;  // initial landmark positions, image pixels
  double norm_distance = 100.0;
  double frame_box = 1024.0;
};

struct NoiseSpec {
  double coordinate_noise_std = 0.0;  // image px, per coordinate
  double heatmap_noise_std = 0.0;     // activation units, per heatmap pixel
  double outlier_rate = 0.0;          // per-frame probability of the wider Gaussian
  double outlier_std = 0.0;           // image px
  uint64_t seed = 0;
};

// Deterministic ground-truth trajectory. Throws DomainError naming the frame
// if the motion exits [0, frame_box]^2.
TrajectorySequence gen_ground_truth(const MotionSpec& spec, uint64_t seed);

// Simulated detector outputs: z = p + iid Gaussian per coordinate, with
// whole frames drawn from the wider outlier Gaussian at `outlier_rate`.
TrajectorySequence corrupt(const TrajectorySequence& p_seq, const NoiseSpec& noise);

// Detector stand-in routed through the codec: render fractional heatmaps,
// add iid pixel noise, decode with the chosen mode, scale back to image
// coordinates.
TrajectorySequence pipeline_through_heatmaps(const TrajectorySequence& p_seq,
                                             const GridSpec& grid, DecodeMode mode,
                                             double heatmap_noise_std, uint64_t seed);

struct BenchmarkConfig {
  int train_videos = 20;
  int test_videos = 10;
  int frames = 300;
  int num_landmarks = 7;
  double frame_box = 1024.0;
  double norm_distance = 100.0;
  std::vector<std::string> motions = {"ramp", "sinusoid", "blink", "piecewise"};
  std::vector<double> noise_levels = {1.0, 2.5};
  double outlier_rate = 0.0;
  double outlier_std = 8.0;
};

struct Benchmark {
  std::vector<TrajectorySequence> train_p, train_z;
  std::vector<TrajectorySequence> test_p, test_z;
};

// Fixed-seed suite of train/test videos cycling through the configured
// motion kinds and noise levels. Video ids carry the motion kind, e.g.
// "test_000_ramp".
Benchmark make_benchmark(const BenchmarkConfig& config, uint64_t seed);

}  // namespace fhr
