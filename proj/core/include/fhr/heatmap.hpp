#pragma once

#include <vector>

#include "fhr/errors.hpp"

namespace fhr {

// Geometry of a heatmap grid. `scale` is the ratio of image pixels per
// heatmap pixel; `sigma` is the Gaussian standard deviation in heatmap pixels.
struct GridSpec {
  int width = 0;
  int height = 0;
  double scale = 1.0;
  double sigma = 3.0;

  void validate() const {
    if (width < 4 || height < 4) throw DomainError("grid must be at least 4x4");
    if (!(scale > 0.0)) throw DomainError("grid scale must be positive");
    if (!(sigma > 0.0)) throw DomainError("grid sigma must be positive");
  }
};

// Row-major real-valued grid. Rendered maps lie in [0, 1]; estimated maps may
// not.
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // values[y * width + x]

  Heatmap() = default;
  Heatmap(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0.0) {}

  double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
  bool empty() const { return values.empty(); }
};

// One heatmap per landmark, plus the grid metadata needed to decode back to
// image coordinates.
struct HeatmapStack {
  GridSpec grid;
  std::vector<Heatmap> maps;
};

}  // namespace fhr
