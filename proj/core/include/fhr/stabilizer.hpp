#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "fhr/geometry.hpp"

namespace fhr {

// Floor applied to prior covariance diagonals so a zero-initialized component
// never yields an infinite density at its mean.
inline constexpr double kCovarianceFloor = 1e-8;
// Floor applied to observation-noise diagonals during fusion and density
// evaluation.
inline constexpr double kNoiseFloor = 1e-12;

// How the mixture posterior is turned into a single output.
//   kMapCandidates (default): evaluate the posterior mixture density at each
//   component's posterior mean and return the argmax.
//   kPosteriorMean: responsibility-weighted average of the candidates.
enum class StabilizerMode { kMapCandidates, kPosteriorMean };

// Trained parameters of the streaming stabilizer. All covariances are
// diagonal in the shared eigenbasis V (rows of V are the eigenvectors, so
// Sigma = V^T diag V). Vectors are flattened landmark sets, interleaved
// (x0, y0, x1, y1, ...).
struct StabilizerParams {
  int K = 2;
  int M = 0;
  double gamma = 0.5;                     // history decay, (0, 1]
  Eigen::VectorXd alpha;                  // K mixture weights, >= 0, sum 1
  Eigen::VectorXd beta;                   // K blend factors in [0, 1]
  Eigen::VectorXd gamma_noise;            // 2M diagonal, >= 0
  std::vector<Eigen::VectorXd> gamma_k;   // K diagonals of 2M entries, >= 0
  Eigen::MatrixXd V;                      // 2M x 2M orthonormal
  StabilizerMode mode = StabilizerMode::kMapCandidates;

  int dims() const { return 2 * M; }
  // Throws DomainError if any invariant is violated (orthonormality of V
  // within 1e-8, alpha summing to 1 within 1e-12, ranges).
  void validate() const;
};

// Per-video recursive accumulators for the exponentially weighted prior
// moments. Size is independent of how many frames have been absorbed.
struct StreamState {
  int t = 1;                      // 1-based index of the next frame
  double weight_sum = 0.0;        // sum of gamma^tau over absorbed frames
  Eigen::VectorXd first_moment;   // sum of gamma^tau x^(t-tau), original basis
  Eigen::VectorXd second_moment;  // sum of gamma^tau (V x^(t-tau)).^2, V basis
  LandmarkSet last_output;

  StreamState() = default;
  explicit StreamState(int M)
      : first_moment(Eigen::VectorXd::Zero(2 * M)), second_moment(Eigen::VectorXd::Zero(2 * M)) {}

  bool has_prior() const { return weight_sum > 0.0; }
};

// Diagnostic record of one fused frame.
struct MixtureDecision {
  static constexpr int kBlend = -1;

  std::vector<Eigen::VectorXd> component_posterior_means;  // K vectors, original basis
  Eigen::VectorXd component_log_weights;                   // K marginal log-weights
  int chosen = 0;                                          // component index, or kBlend
};

struct PriorMoments {
  Eigen::VectorXd mu;                       // shared weighted mean, original basis
  std::vector<Eigen::VectorXd> sigma_diag;  // K diagonals in the V basis, floored
};

struct StabilizeResult {
  LandmarkSet x;
  MixtureDecision decision;
};

// Covariance matrix eigenbasis of all consecutive ground-truth differences.
// Rows are eigenvectors sorted by descending eigenvalue, sign-fixed so the
// largest-magnitude entry of each is positive. Repeated or zero eigenvalues
// are completed deterministically with identity-seeded orthonormal vectors.
// Throws InsufficientDataError when fewer than two frames exist in total.
Eigen::MatrixXd build_eigenbasis(const std::vector<TrajectorySequence>& training);

// Absorbs one output frame into the recursive accumulators:
//   weight_sum <- gamma (1 + weight_sum)
//   first_moment <- gamma (x + first_moment)
//   second_moment <- gamma ((Vx).^2 + second_moment)
// Throws DomainError (state untouched) on non-finite input.
void prior_update(StreamState& state, const LandmarkSet& x_new, double gamma,
                  const Eigen::MatrixXd& V);

// Weighted mean and per-component blended diagonal covariance:
//   sigma_k = beta_k Gamma_k + (1 - beta_k) diag(rotated empirical covariance)
// with entries floored at kCovarianceFloor. Throws NoPriorError if no frame
// has been absorbed yet.
PriorMoments prior_moments(const StreamState& state, const StabilizerParams& params);

// One step of the streaming MAP filter. The first frame (no prior yet) passes
// through unchanged. Updates `state` with the produced output.
StabilizeResult stabilize_frame(StreamState& state, const StabilizerParams& params,
                                const LandmarkSet& z);

// Causal fold of stabilize_frame over a sequence. Output x^(t) depends only
// on z^(1..t).
TrajectorySequence stabilize_sequence(const StabilizerParams& params,
                                      const TrajectorySequence& z_seq);

std::string to_string(StabilizerMode mode);
StabilizerMode stabilizer_mode_from_string(const std::string& s);

}  // namespace fhr
