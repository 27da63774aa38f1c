#include "fhr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "fhr/errors.hpp"

namespace fhr {

namespace {

constexpr double kOrientationMotionFloor = 1e-6;

void check_pair(const TrajectorySequence& x, const TrajectorySequence& p) {
  if (x.frames.size() != p.frames.size()) throw ShapeError("sequences differ in frame count");
  if (!x.frames.empty() && x.frames[0].size() != p.frames[0].size()) {
    throw ShapeError("sequences differ in landmark count");
  }
}

std::vector<LandmarkSet> differences(const TrajectorySequence& seq) {
  std::vector<LandmarkSet> out;
  out.reserve(seq.frames.size() > 0 ? seq.frames.size() - 1 : 0);
  for (size_t t = 1; t < seq.frames.size(); ++t) {
    LandmarkSet d(seq.frames[t].size());
    for (size_t m = 0; m < d.size(); ++m) d[m] = seq.frames[t][m] - seq.frames[t - 1][m];
    out.push_back(std::move(d));
  }
  return out;
}

double frame_error(const LandmarkSet& x, const LandmarkSet& p) {
  double sum = 0.0;
  for (size_t m = 0; m < x.size(); ++m) sum += (x[m] - p[m]).norm();
  return sum / static_cast<double>(x.size());
}

}  // namespace

double nrmse(const TrajectorySequence& x_seq, const TrajectorySequence& p_seq,
             double norm_distance) {
  check_pair(x_seq, p_seq);
  if (!(norm_distance > 0.0)) throw DomainError("norm_distance must be positive");
  if (x_seq.frames.empty()) throw InsufficientDataError("no frames to evaluate");
  double acc = 0.0;
  for (size_t t = 0; t < x_seq.frames.size(); ++t) {
    acc += frame_error(x_seq.frames[t], p_seq.frames[t]);
  }
  return acc / static_cast<double>(x_seq.frames.size()) / norm_distance * 100.0;
}

std::vector<double> per_frame_nrmse(const TrajectorySequence& x_seq,
                                    const TrajectorySequence& p_seq, double norm_distance) {
  check_pair(x_seq, p_seq);
  if (!(norm_distance > 0.0)) throw DomainError("norm_distance must be positive");
  std::vector<double> out(x_seq.frames.size());
  for (size_t t = 0; t < x_seq.frames.size(); ++t) {
    out[t] = frame_error(x_seq.frames[t], p_seq.frames[t]) / norm_distance * 100.0;
  }
  return out;
}

CedResult ced_auc_failure(const std::vector<double>& per_image_nrmse, double threshold) {
  if (per_image_nrmse.empty()) throw InsufficientDataError("empty error list");
  if (!(threshold > 0.0)) throw DomainError("threshold must be positive");
  const double n = static_cast<double>(per_image_nrmse.size());
  // Summation in sorted order keeps the result exactly permutation-invariant.
  std::vector<double> sorted = per_image_nrmse;
  std::sort(sorted.begin(), sorted.end());
  double area = 0.0;
  long failures = 0;
  for (const double e : sorted) {
    if (e > threshold) ++failures;
    area += std::max(0.0, threshold - e);
  }
  CedResult out;
  out.failure_percent = failures / n * 100.0;
  out.auc_percent = area / (n * threshold) * 100.0;
  return out;
}

double stability_nrmse(const TrajectorySequence& x_seq, const TrajectorySequence& p_seq,
                       double norm_distance) {
  check_pair(x_seq, p_seq);
  if (x_seq.frames.size() < 2) throw InsufficientDataError("stability needs at least two frames");
  TrajectorySequence dx = x_seq, dp = p_seq;
  dx.frames = differences(x_seq);
  dp.frames = differences(p_seq);
  return nrmse(dx, dp, norm_distance);
}

StabilityDecomposition stability_decomposition(const TrajectorySequence& x_seq,
                                               const TrajectorySequence& p_seq) {
  check_pair(x_seq, p_seq);
  if (x_seq.frames.size() < 2) throw InsufficientDataError("stability needs at least two frames");
  const auto dx = differences(x_seq);
  const auto dp = differences(p_seq);
  const size_t M = x_seq.frames[0].size();

  StabilityDecomposition out;
  out.magnitude.assign(M, 0.0);
  out.orientation_deg.assign(M, 0.0);
  std::vector<long> orient_count(M, 0);
  for (size_t t = 0; t < dx.size(); ++t) {
    for (size_t m = 0; m < M; ++m) {
      const Point2d gap = dx[t][m] - dp[t][m];
      out.magnitude[m] += gap.x * gap.x + gap.y * gap.y;
      if (dx[t][m].norm() >= kOrientationMotionFloor &&
          dp[t][m].norm() >= kOrientationMotionFloor) {
        double delta = std::atan2(dx[t][m].y, dx[t][m].x) - std::atan2(dp[t][m].y, dp[t][m].x);
        delta = std::abs(std::remainder(delta, 2.0 * std::numbers::pi));  // wrap to [0, pi]
        out.orientation_deg[m] += delta * 180.0 / std::numbers::pi;
        orient_count[m] += 1;
      }
    }
  }
  for (size_t m = 0; m < M; ++m) {
    out.magnitude[m] /= static_cast<double>(dx.size());
    if (orient_count[m] > 0) out.orientation_deg[m] /= static_cast<double>(orient_count[m]);
  }
  return out;
}

double lag_estimate(const TrajectorySequence& x_seq, const TrajectorySequence& p_seq) {
  check_pair(x_seq, p_seq);
  const int T = x_seq.num_frames();
  if (T < 8) throw InsufficientDataError("lag estimate needs at least 8 frames");

  std::vector<Eigen::VectorXd> xv(T), pv(T);
  for (int t = 0; t < T; ++t) {
    xv[t] = to_vector(x_seq.frames[t]);
    pv[t] = to_vector(p_seq.frames[t]);
  }

  // Alignment score of x^(t) against p^(t-s): negative mean squared gap over
  // the overlap window. The raw gap is kept (no recentering) so that offsets
  // along the motion direction, which is what a delayed output looks like on
  // a ramp, register as lag.
  auto score = [&](int s) -> double {
    const int lo = std::max(0, s);
    const int hi = std::min(T - 1, T - 1 + s);
    double acc = 0.0;
    for (int t = lo; t <= hi; ++t) acc += (xv[t] - pv[t - s]).squaredNorm();
    return -acc / static_cast<double>(hi - lo + 1);
  };

  constexpr int kMaxShift = 5;
  // One extra shift on each side so the parabola has neighbors at the borders.
  std::vector<double> r(kMaxShift + 3);
  for (int s = -1; s <= kMaxShift + 1; ++s) r[s + 1] = score(s);

  int best = 0;
  for (int s = 1; s <= kMaxShift; ++s) {
    if (r[s + 1] > r[best + 1]) best = s;
  }

  double signal = 0.0;
  for (int t = 0; t < T; ++t) signal += pv[t].squaredNorm();
  signal /= T;
  // Perfect alignment at an integer shift (also covers constant sequences).
  if (-r[best + 1] <= 1e-12 * std::max(1.0, signal)) return best;

  const double r0 = r[best];
  const double r1 = r[best + 1];
  const double r2 = r[best + 2];
  const double denom = r0 - 2.0 * r1 + r2;
  double refined = best;
  if (std::abs(denom) > 1e-12) refined += 0.5 * (r0 - r2) / denom;
  return std::clamp(refined, 0.0, static_cast<double>(kMaxShift));
}

MetricsReport evaluate_metrics(const std::vector<TrajectorySequence>& x_seqs,
                               const std::vector<TrajectorySequence>& p_seqs) {
  if (x_seqs.size() != p_seqs.size() || x_seqs.empty()) {
    throw ShapeError("evaluation needs aligned, non-empty sequence collections");
  }
  MetricsReport report;
  std::vector<double> all_frames;
  double stab_acc = 0.0;
  long stab_frames = 0;
  double lag_acc = 0.0;
  long lag_count = 0;
  const size_t M = p_seqs[0].frames.empty() ? 0 : p_seqs[0].frames[0].size();
  report.per_landmark_magnitude.assign(M, 0.0);
  report.per_landmark_orientation_deg.assign(M, 0.0);
  long decomposition_videos = 0;

  for (size_t i = 0; i < x_seqs.size(); ++i) {
    const double norm = p_seqs[i].norm_distance;
    const auto frames = per_frame_nrmse(x_seqs[i], p_seqs[i], norm);
    all_frames.insert(all_frames.end(), frames.begin(), frames.end());
    if (x_seqs[i].frames.size() >= 2) {
      const long n = static_cast<long>(x_seqs[i].frames.size()) - 1;
      stab_acc += stability_nrmse(x_seqs[i], p_seqs[i], norm) * n;
      stab_frames += n;
      const auto decomp = stability_decomposition(x_seqs[i], p_seqs[i]);
      for (size_t m = 0; m < M; ++m) {
        report.per_landmark_magnitude[m] += decomp.magnitude[m];
        report.per_landmark_orientation_deg[m] += decomp.orientation_deg[m];
      }
      ++decomposition_videos;
    }
    if (x_seqs[i].num_frames() >= 8) {
      lag_acc += lag_estimate(x_seqs[i], p_seqs[i]);
      ++lag_count;
    }
  }

  double nrmse_acc = 0.0;
  for (const double e : all_frames) nrmse_acc += e;
  report.nrmse_percent = all_frames.empty() ? 0.0 : nrmse_acc / all_frames.size();
  const CedResult ced = ced_auc_failure(all_frames);
  report.auc_percent = ced.auc_percent;
  report.failure_rate_percent = ced.failure_percent;
  report.stability_nrmse_percent = stab_frames > 0 ? stab_acc / stab_frames : 0.0;
  if (decomposition_videos > 0) {
    for (size_t m = 0; m < M; ++m) {
      report.per_landmark_magnitude[m] /= decomposition_videos;
      report.per_landmark_orientation_deg[m] /= decomposition_videos;
    }
  }
  report.lag_frames = lag_count > 0 ? lag_acc / lag_count : 0.0;
  return report;
}

}  // namespace fhr
