#include "fhr/heatmap_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fhr {

namespace {

constexpr double kLogClamp = 1e-12;

Heatmap render_one(double cx, double cy, const GridSpec& grid) {
  Heatmap h(grid.width, grid.height);
  const double inv2s2 = 1.0 / (2.0 * grid.sigma * grid.sigma);
  for (int y = 0; y < grid.height; ++y) {
    const double dy = y - cy;
    double* row = h.values.data() + static_cast<size_t>(y) * grid.width;
    for (int x = 0; x < grid.width; ++x) {
      const double dx = x - cx;
      row[x] = std::exp(-(dx * dx + dy * dy) * inv2s2);
    }
  }
  return h;
}

}  // namespace

HeatmapStack render_heatmaps(const LandmarkSet& landmarks, const GridSpec& grid, EncodeMode mode) {
  grid.validate();
  if (landmarks.empty()) throw DomainError("landmark set must not be empty");

  HeatmapStack stack;
  stack.grid = grid;
  stack.maps.reserve(landmarks.size());
  for (size_t m = 0; m < landmarks.size(); ++m) {
    const Point2d& lm = landmarks[m];
    if (!lm.finite()) throw DomainError("landmark " + std::to_string(m) + " is not finite");
    double cx = lm.x / grid.scale;
    double cy = lm.y / grid.scale;
    if (cx < 0.0 || cx > grid.width - 1 || cy < 0.0 || cy > grid.height - 1) {
      throw DomainError("landmark " + std::to_string(m) + " lies outside the grid after scaling");
    }
    if (mode == EncodeMode::kRounded) {
      cx = std::round(cx);
      cy = std::round(cy);
    }
    stack.maps.push_back(render_one(cx, cy, grid));
  }
  return stack;
}

PeakIndex argmax_peak(const Heatmap& h) {
  if (h.empty()) throw InvalidHeatmapError("argmax of an empty heatmap");
  double best = -std::numeric_limits<double>::infinity();
  size_t best_idx = 0;
  for (size_t i = 0; i < h.values.size(); ++i) {
    const double v = h.values[i];
    if (std::isnan(v)) throw InvalidHeatmapError("heatmap contains NaN");
    if (v > best) {
      best = v;
      best_idx = i;
    }
  }
  const int w = h.width;
  return {static_cast<int>(best_idx % w), static_cast<int>(best_idx / w)};
}

FractionalPeak fractional_peak_at(const Heatmap& h, double sigma, PeakIndex zhat, int dx, int dy) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if ((dx != 1 && dx != -1) || (dy != 1 && dy != -1)) {
    throw DomainError("sample offsets must be +1 or -1");
  }
  const int x1 = zhat.x + dx;
  const int y2 = zhat.y + dy;
  if (x1 < 0 || x1 >= h.width || y2 < 0 || y2 >= h.height) {
    throw DomainError("sample offset leaves the heatmap");
  }

  double h0 = h.at(zhat.x, zhat.y);
  double hx = h.at(x1, zhat.y);
  double hy = h.at(zhat.x, y2);
  if (std::isnan(h0) || std::isnan(hx) || std::isnan(hy)) {
    throw InvalidHeatmapError("heatmap contains NaN at a sample point");
  }

  FractionalPeak out;
  if (h0 <= 0.0 || hx <= 0.0 || hy <= 0.0) {
    out.clamped = true;
    h0 = std::max(h0, kLogClamp);
    hx = std::max(hx, kLogClamp);
    hy = std::max(hy, kLogClamp);
  }

  const double s2 = sigma * sigma;
  // log-difference form of the Gaussian model solved for the center; the
  // quadratic terms carry the sample positions so any +-1 offset works.
  const double zx2 = static_cast<double>(zhat.x) * zhat.x;
  const double zy2 = static_cast<double>(zhat.y) * zhat.y;
  const double ex = s2 * (std::log(hx) - std::log(h0)) -
                    0.5 * (zx2 - static_cast<double>(x1) * x1);
  const double ey = s2 * (std::log(hy) - std::log(h0)) -
                    0.5 * (zy2 - static_cast<double>(y2) * y2);
  out.x = ex / dx;
  out.y = ey / dy;
  return out;
}

FractionalPeak fractional_peak(const Heatmap& h, double sigma) {
  if (h.width < 2 || h.height < 2) {
    throw InvalidHeatmapError("heatmap too small for three-point sampling");
  }
  const PeakIndex zhat = argmax_peak(h);
  const int dx = (zhat.x == h.width - 1) ? -1 : 1;
  const int dy = (zhat.y == h.height - 1) ? -1 : 1;
  return fractional_peak_at(h, sigma, zhat, dx, dy);
}

LandmarkSet decode_stack(const HeatmapStack& stack, DecodeMode mode,
                         std::vector<bool>* clamped_flags) {
  stack.grid.validate();
  LandmarkSet out;
  out.reserve(stack.maps.size());
  if (clamped_flags) clamped_flags->assign(stack.maps.size(), false);
  for (size_t m = 0; m < stack.maps.size(); ++m) {
    const Heatmap& h = stack.maps[m];
    if (mode == DecodeMode::kChr) {
      const PeakIndex p = argmax_peak(h);
      out.push_back({p.x * stack.grid.scale, p.y * stack.grid.scale});
    } else {
      const FractionalPeak p = fractional_peak(h, stack.grid.sigma);
      if (clamped_flags) (*clamped_flags)[m] = p.clamped;
      out.push_back({p.x * stack.grid.scale, p.y * stack.grid.scale});
    }
  }
  return out;
}

}  // namespace fhr
