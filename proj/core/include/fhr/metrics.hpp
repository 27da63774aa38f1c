#pragma once

#include <vector>

#include "fhr/geometry.hpp"

namespace fhr {

struct MetricsReport {
  double nrmse_percent = 0.0;
  double auc_percent = 0.0;
  double failure_rate_percent = 0.0;
  double stability_nrmse_percent = 0.0;
  std::vector<double> per_landmark_magnitude;        // mean ||dx - dp||^2 per landmark
  std::vector<double> per_landmark_orientation_deg;  // mean |angle(dx) - angle(dp)|
  double lag_frames = 0.0;
};

// Mean per-landmark Euclidean error divided by norm_distance, as a percent.
double nrmse(const TrajectorySequence& x_seq, const TrajectorySequence& p_seq,
             double norm_distance);

// One NRMSE value per frame, for CED curves.
std::vector<double> per_frame_nrmse(const TrajectorySequence& x_seq,
                                    const TrajectorySequence& p_seq, double norm_distance);

struct CedResult {
  double auc_percent = 0.0;
  double failure_percent = 0.0;
};

// Failure rate above the threshold and the exact area under the empirical
// cumulative error distribution from 0 to the threshold, normalized by the
// threshold.
CedResult ced_auc_failure(const std::vector<double>& per_image_nrmse, double threshold = 8.0);

// NRMSE between the frame-to-frame motion of prediction and ground truth.
// Needs at least two frames.
double stability_nrmse(const TrajectorySequence& x_seq, const TrajectorySequence& p_seq,
                       double norm_distance);

struct StabilityDecomposition {
  std::vector<double> magnitude;        // per landmark, mean ||dx - dp||^2
  std::vector<double> orientation_deg;  // per landmark, mean absolute angle gap in [0, 180]
};

// Per-landmark split of the stability error into magnitude and orientation.
// Frames where either motion is shorter than 1e-6 px are skipped for the
// orientation average.
StabilityDecomposition stability_decomposition(const TrajectorySequence& x_seq,
                                               const TrajectorySequence& p_seq);

// Sub-frame delay of x behind p: argmax over integer shifts in [0, 5] of an
// alignment score (negative mean squared displacement over the overlap),
// refined by parabolic interpolation of the peak. Constant sequences give 0
// by convention. Needs at least 8 frames.
double lag_estimate(const TrajectorySequence& x_seq, const TrajectorySequence& p_seq);

// Full report for one method over a set of videos; frame-level statistics are
// pooled across videos, lag is averaged per video.
MetricsReport evaluate_metrics(const std::vector<TrajectorySequence>& x_seqs,
                               const std::vector<TrajectorySequence>& p_seqs);

}  // namespace fhr
