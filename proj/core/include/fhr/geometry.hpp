#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fhr/errors.hpp"

namespace fhr {

struct Point2d {
  double x = 0.0;
  double y = 0.0;

  Point2d operator+(const Point2d& o) const { return {x + o.x, y + o.y}; }
  Point2d operator-(const Point2d& o) const { return {x - o.x, y - o.y}; }
  Point2d operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point2d& o) const = default;

  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

// Fractional (x, y) coordinates of the M landmarks of one frame, in image pixels.
using LandmarkSet = std::vector<Point2d>;

// Ordered frames of one video plus the normalization metadata carried by the
// trajectory file format.
struct TrajectorySequence {
  std::string video_id;
  double norm_distance = 100.0;  // stands in for the inter-ocular distance
  double frame_box = 1024.0;     // side of the square region landmarks live in
  std::vector<LandmarkSet> frames;

  int num_landmarks() const { return frames.empty() ? 0 : static_cast<int>(frames.front().size()); }
  int num_frames() const { return static_cast<int>(frames.size()); }
};

// Landmark sets are flattened to 2M-vectors with interleaved coordinates
// (x0, y0, x1, y1, ...). The eigenbasis V and all diagonal parameters use
// this ordering.
inline Eigen::VectorXd to_vector(const LandmarkSet& lms) {
  Eigen::VectorXd v(2 * static_cast<Eigen::Index>(lms.size()));
  for (size_t m = 0; m < lms.size(); ++m) {
    v[2 * m] = lms[m].x;
    v[2 * m + 1] = lms[m].y;
  }
  return v;
}

inline LandmarkSet to_landmarks(const Eigen::VectorXd& v) {
  if (v.size() % 2 != 0) throw ShapeError("flattened landmark vector must have even length");
  LandmarkSet lms(static_cast<size_t>(v.size() / 2));
  for (size_t m = 0; m < lms.size(); ++m) lms[m] = {v[2 * m], v[2 * m + 1]};
  return lms;
}

inline bool all_finite(const LandmarkSet& lms) {
  for (const auto& p : lms)
    if (!p.finite()) return false;
  return true;
}

}  // namespace fhr
