#pragma once

#include <vector>

#include "fhr/geometry.hpp"
#include "fhr/heatmap.hpp"

namespace fhr {

// How the Gaussian center is placed when rendering.
//   kFractional keeps the sub-pixel center intact.
//   kRounded snaps it to the nearest grid point (round half away from zero),
//   which is what conventional pipelines do and what introduces quantization
//   error at decode time.
enum class EncodeMode { kFractional, kRounded };

// How a stack is decoded back to image coordinates.
//   kChr: integer argmax times scale.
//   kFhr: closed-form sub-pixel peak times scale.
enum class DecodeMode { kFhr, kChr };

struct PeakIndex {
  int x = 0;
  int y = 0;
  bool operator==(const PeakIndex&) const = default;
};

struct FractionalPeak {
  double x = 0.0;
  double y = 0.0;
  // True when a sampled activation was <= 0 and had to be clamped to 1e-12
  // before the logarithm. Estimated (noisy) maps can dip below zero.
  bool clamped = false;
};

// Renders one Gaussian heatmap per landmark. Landmark coordinates are image
// pixels; the center on the grid is landmark/scale (or its rounding).
// Throws DomainError naming the landmark index if a scaled landmark falls
// outside [0, width-1] x [0, height-1].
HeatmapStack render_heatmaps(const LandmarkSet& landmarks, const GridSpec& grid, EncodeMode mode);

// Integer grid coordinate of the maximum value; ties broken by smallest
// row-major index. Throws InvalidHeatmapError on NaN.
PeakIndex argmax_peak(const Heatmap& h);

// Closed-form sub-pixel peak from three samples under the Gaussian model.
// Samples the argmax plus one neighbor in +x and one in +y; on the right or
// bottom edge the neighbor is taken in the opposite direction instead and the
// sign is folded into the solved coordinate.
FractionalPeak fractional_peak(const Heatmap& h, double sigma);

// Same, but with caller-chosen sample offsets (dx, dy in {-1, +1}). The
// result is direction-independent on noiseless Gaussian maps.
FractionalPeak fractional_peak_at(const Heatmap& h, double sigma, PeakIndex zhat, int dx, int dy);

// Per-map peak extraction and scaling back to image coordinates. If
// `clamped_flags` is non-null it receives one flag per map (always false in
// CHR mode).
LandmarkSet decode_stack(const HeatmapStack& stack, DecodeMode mode,
                         std::vector<bool>* clamped_flags = nullptr);

}  // namespace fhr
