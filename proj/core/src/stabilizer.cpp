#include "fhr/stabilizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "fhr/errors.hpp"

namespace fhr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_normal_diag(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& var) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double d = x[j] - mean[j];
    acc += -0.5 * std::log(2.0 * std::numbers::pi * var[j]) - 0.5 * d * d / var[j];
  }
  return acc;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf)
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v[i] - m);
  return m + std::log(acc);
}

// Largest-magnitude entry positive; first such entry breaks ties.
void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (v[best] < 0.0) v = -v;
}

}  // namespace

void StabilizerParams::validate() const {
  if (K < 1) throw DomainError("stabilizer needs at least one mixture component");
  if (M < 1) throw DomainError("stabilizer needs at least one landmark");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  const int n = dims();
  if (alpha.size() != K || beta.size() != K) throw ShapeError("alpha/beta must have K entries");
  if (gamma_noise.size() != n) throw ShapeError("gamma_noise must have 2M entries");
  if (static_cast<int>(gamma_k.size()) != K) throw ShapeError("gamma_k must have K diagonals");
  for (const auto& g : gamma_k)
    if (g.size() != n) throw ShapeError("each gamma_k diagonal must have 2M entries");
  if (V.rows() != n || V.cols() != n) throw ShapeError("V must be 2M x 2M");

  if (std::abs(alpha.sum() - 1.0) > 1e-12) throw DomainError("alpha must sum to 1");
  for (int k = 0; k < K; ++k) {
    if (alpha[k] < 0.0) throw DomainError("alpha entries must be non-negative");
    if (beta[k] < 0.0 || beta[k] > 1.0) throw DomainError("beta entries must lie in [0, 1]");
    if (gamma_k[k].minCoeff() < 0.0) throw DomainError("gamma_k entries must be non-negative");
  }
  if (gamma_noise.minCoeff() < 0.0) throw DomainError("gamma_noise entries must be non-negative");

  const double ortho_err = (V * V.transpose() - Eigen::MatrixXd::Identity(n, n))
                               .cwiseAbs()
                               .maxCoeff();
  if (ortho_err > 1e-8) throw DomainError("V is not orthonormal");
}

Eigen::MatrixXd build_eigenbasis(const std::vector<TrajectorySequence>& training) {
  int dims = 0;
  long pair_count = 0;
  for (const auto& seq : training) {
    if (seq.frames.empty()) continue;
    const int d = 2 * seq.num_landmarks();
    if (dims == 0) dims = d;
    if (d != dims) throw ShapeError("all training sequences must share the landmark count");
    pair_count += std::max(0, seq.num_frames() - 1);
  }
  if (dims == 0 || pair_count < 1) {
    throw InsufficientDataError("eigenbasis needs at least two frames of training data");
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dims);
  for (const auto& seq : training) {
    for (int t = 1; t < seq.num_frames(); ++t) {
      mean += to_vector(seq.frames[t]) - to_vector(seq.frames[t - 1]);
    }
  }
  mean /= static_cast<double>(pair_count);

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dims, dims);
  for (const auto& seq : training) {
    for (int t = 1; t < seq.num_frames(); ++t) {
      const Eigen::VectorXd d = to_vector(seq.frames[t]) - to_vector(seq.frames[t - 1]) - mean;
      S.noalias() += d * d.transpose();
    }
  }
  S /= static_cast<double>(pair_count);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");

  const double lambda_max = std::max(es.eigenvalues().maxCoeff(), 0.0);
  const double tol = lambda_max * 1e-12;

  // Rows sorted by descending eigenvalue; eigenvalues at or below tol are
  // treated as null space and replaced by an identity-seeded completion.
  Eigen::MatrixXd V(dims, dims);
  int row = 0;
  for (Eigen::Index i = dims - 1; i >= 0; --i) {
    if (es.eigenvalues()[i] <= tol) break;
    Eigen::VectorXd v = es.eigenvectors().col(i);
    fix_sign(v);
    V.row(row++) = v.transpose();
  }
  for (int i = 0; i < dims && row < dims; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(dims, i);
    for (int r = 0; r < row; ++r) v -= V.row(r).dot(v) * V.row(r).transpose();
    const double nrm = v.norm();
    if (nrm > 1e-6) {
      v /= nrm;
      fix_sign(v);
      V.row(row++) = v.transpose();
    }
  }
  if (row != dims) throw DomainError("failed to complete eigenbasis to full rank");
  return V;
}

void prior_update(StreamState& state, const LandmarkSet& x_new, double gamma,
                  const Eigen::MatrixXd& V) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  if (!all_finite(x_new)) throw DomainError("cannot absorb a non-finite frame");
  const Eigen::VectorXd x = to_vector(x_new);
  if (x.size() != state.first_moment.size() || V.rows() != x.size()) {
    throw ShapeError("frame dimension does not match stream state");
  }
  const Eigen::VectorXd rotated = V * x;
  state.weight_sum = gamma * (1.0 + state.weight_sum);
  state.first_moment = gamma * (x + state.first_moment);
  state.second_moment = gamma * (rotated.cwiseProduct(rotated) + state.second_moment);
  state.last_output = x_new;
  state.t += 1;
}

PriorMoments prior_moments(const StreamState& state, const StabilizerParams& params) {
  if (!state.has_prior()) throw NoPriorError("no frames absorbed yet");
  PriorMoments out;
  out.mu = state.first_moment / state.weight_sum;
  const Eigen::VectorXd mu_rot = params.V * out.mu;
  Eigen::VectorXd empirical =
      (state.second_moment / state.weight_sum - mu_rot.cwiseProduct(mu_rot)).cwiseMax(0.0);
  out.sigma_diag.reserve(params.K);
  for (int k = 0; k < params.K; ++k) {
    Eigen::VectorXd s =
        params.beta[k] * params.gamma_k[k] + (1.0 - params.beta[k]) * empirical;
    out.sigma_diag.push_back(s.cwiseMax(kCovarianceFloor));
  }
  return out;
}

StabilizeResult stabilize_frame(StreamState& state, const StabilizerParams& params,
                                const LandmarkSet& z) {
  if (static_cast<int>(z.size()) != params.M) {
    throw ShapeError("observation landmark count does not match params");
  }
  if (!all_finite(z)) throw DomainError("observation is not finite");

  StabilizeResult res;
  res.decision.component_log_weights = Eigen::VectorXd::Zero(params.K);

  if (!state.has_prior()) {
    // Cold start: pass the observation through; the prior activates once the
    // first frame has been absorbed.
    res.x = z;
    res.decision.component_posterior_means.assign(params.K, to_vector(z));
    for (int k = 0; k < params.K; ++k)
      res.decision.component_log_weights[k] = std::log(params.alpha[k]);
    res.decision.chosen = 0;
    prior_update(state, res.x, params.gamma, params.V);
    return res;
  }

  const PriorMoments pm = prior_moments(state, params);
  const Eigen::VectorXd w = params.V * to_vector(z);
  const Eigen::VectorXd m = params.V * pm.mu;
  const Eigen::VectorXd r = params.gamma_noise.cwiseMax(kNoiseFloor);

  std::vector<Eigen::VectorXd> candidates(params.K);
  Eigen::VectorXd log_weights(params.K);
  for (int k = 0; k < params.K; ++k) {
    const Eigen::VectorXd& s = pm.sigma_diag[k];
    // Per-dimension precision-weighted fusion of prior mean and observation.
    candidates[k] = (r.cwiseProduct(m) + s.cwiseProduct(w)).cwiseQuotient(s + r);
    log_weights[k] = std::log(params.alpha[k]) + log_normal_diag(w, m, s + r);
  }

  Eigen::VectorXd x_rot;
  if (params.mode == StabilizerMode::kMapCandidates) {
    // Posterior log-density (up to the shared evidence constant) at each
    // candidate; argmax wins, first index on ties.
    int best = 0;
    double best_score = -kInf;
    for (int k = 0; k < params.K; ++k) {
      Eigen::VectorXd comp_logs(params.K);
      for (int l = 0; l < params.K; ++l) {
        comp_logs[l] =
            std::log(params.alpha[l]) + log_normal_diag(candidates[k], m, pm.sigma_diag[l]);
      }
      const double score = log_sum_exp(comp_logs) + log_normal_diag(w, candidates[k], r);
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    x_rot = candidates[best];
    res.decision.chosen = best;
  } else {
    const double lse = log_sum_exp(log_weights);
    x_rot = Eigen::VectorXd::Zero(params.dims());
    for (int k = 0; k < params.K; ++k) {
      const double resp = std::exp(log_weights[k] - lse);
      x_rot += resp * candidates[k];
    }
    res.decision.chosen = MixtureDecision::kBlend;
  }

  res.x = to_landmarks(params.V.transpose() * x_rot);
  res.decision.component_log_weights = log_weights;
  res.decision.component_posterior_means.reserve(params.K);
  for (int k = 0; k < params.K; ++k) {
    res.decision.component_posterior_means.push_back(params.V.transpose() * candidates[k]);
  }
  prior_update(state, res.x, params.gamma, params.V);
  return res;
}

TrajectorySequence stabilize_sequence(const StabilizerParams& params,
                                      const TrajectorySequence& z_seq) {
  params.validate();
  if (z_seq.frames.empty()) throw InsufficientDataError("sequence has no frames");
  TrajectorySequence out = z_seq;
  StreamState state(params.M);
  for (size_t t = 0; t < z_seq.frames.size(); ++t) {
    out.frames[t] = stabilize_frame(state, params, z_seq.frames[t]).x;
  }
  return out;
}

std::string to_string(StabilizerMode mode) {
  return mode == StabilizerMode::kMapCandidates ? "map-candidates" : "posterior-mean";
}

StabilizerMode stabilizer_mode_from_string(const std::string& s) {
  if (s == "map-candidates") return StabilizerMode::kMapCandidates;
  if (s == "posterior-mean") return StabilizerMode::kPosteriorMean;
  throw DomainError("unknown stabilizer mode: " + s);
}

}  // namespace fhr
