#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fhr/geometry.hpp"
#include "fhr/stabilizer.hpp"

namespace fhr {

struct TrainConfig {
  double lambda1 = 1.0;   // weight of the smoothness loss
  double lambda2 = 10.0;  // weight of the time-delay term
  double lambda3 = 1.0;   // line-vs-midpoint trade-off inside the smoothness loss
  int max_iters = 400;
  double x_tol = 1e-8;
  double f_tol = 1e-10;
  uint64_t seed = 0;  // recorded for reproducibility; the search itself is deterministic
  // Diagonal parameters are tied into this many groups along the eigen
  // spectrum to keep the simplex dimension manageable; 0 disables tying.
  int tie_groups = 4;
};

struct LossBreakdown {
  double reg_euclidean = 0.0;   // mean ||x - p||^2 over all frames
  double reg_time_delay = 0.0;  // mean squared delay coefficient over valid t >= 2 frames
  double tm_smooth = 0.0;       // mean smoothness bracket over interior frames
  double total = 0.0;           // reg_euclidean + lambda2 * reg_time_delay + lambda1 * tm_smooth

  struct VideoTerms {
    double euclidean_sum = 0.0;
    double delay_sum = 0.0;
    long delay_frames = 0;  // t >= 2 frames with non-degenerate ground-truth motion
    double tm_sum = 0.0;
    long frames = 0;
    long interior_frames = 0;
  };
  std::vector<VideoTerms> per_video;
};

struct RegLoss {
  double euclidean = 0.0;
  double time_delay = 0.0;
};

// Accuracy term plus the squared pseudoinverse-projection delay coefficient.
// Frames whose ground-truth motion has squared norm below 1e-12 contribute
// nothing and are excluded from the delay mean.
RegLoss loss_reg(const std::vector<TrajectorySequence>& x_seqs,
                 const std::vector<TrajectorySequence>& p_seqs);

// Minimizer of ||x_cur - q x_prev - (1-q) x_next||^2 + lambda3 (q - 1/2)^2.
// Returns 1/2 when the quadratic coefficient is degenerate.
double closed_form_q(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& x_cur,
                     const Eigen::VectorXd& x_next, double lambda3);

// Mean over interior frames of the smoothness bracket evaluated at the
// closed-form q. Sequences shorter than three frames contribute nothing.
double loss_tm(const std::vector<TrajectorySequence>& x_seqs, double lambda3);

// Stabilizes every sequence with `params` and combines the loss terms.
LossBreakdown total_loss(const StabilizerParams& params,
                         const std::vector<TrajectorySequence>& z_seqs,
                         const std::vector<TrajectorySequence>& p_seqs,
                         const TrainConfig& config);

// Data-driven starting point: gamma_noise = rho I, gamma_1 = 0 (floored),
// gamma_2 = 10 rho I, gamma = beta_k = 0.5, alpha uniform, V from the
// ground-truth difference eigenbasis. rho is the average per-coordinate
// variance of z - p.
StabilizerParams init_params(const std::vector<TrajectorySequence>& z_seqs,
                             const std::vector<TrajectorySequence>& p_seqs);

// Smooth bijection between valid parameters and an unconstrained vector:
// logit for gamma and beta, softmax logits for alpha, softplus for diagonal
// groups. V, K, M, mode and the group structure come from `reference`.
Eigen::VectorXd unconstrain_params(const StabilizerParams& params, int tie_groups);
StabilizerParams constrain_params(const Eigen::VectorXd& theta, const StabilizerParams& reference,
                                  int tie_groups);

struct HistoryRow {
  int iter = 0;
  double reg_euclidean = 0.0;
  double reg_time_delay = 0.0;
  double tm_smooth = 0.0;
  double total = 0.0;
};

struct FitResult {
  StabilizerParams params;
  LossBreakdown final_loss;
  std::vector<HistoryRow> history;  // best-so-far per iteration, non-increasing
  int iterations = 0;
  int evaluations = 0;
  std::string stop_reason;
};

// Derivative-free minimization of total_loss over the reparameterized
// parameter space. Never returns parameters worse than params0; evaluations
// that throw or produce non-finite loss are treated as +infinity.
FitResult fit(const StabilizerParams& params0, const std::vector<TrajectorySequence>& z_seqs,
              const std::vector<TrajectorySequence>& p_seqs, const TrainConfig& config);

}  // namespace fhr
