#include "fhr/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fhr/errors.hpp"
#include "fhr/nelder_mead.hpp"

namespace fhr {

namespace {

constexpr double kDegenerateMotion = 1e-12;

void check_aligned(const std::vector<TrajectorySequence>& a,
                   const std::vector<TrajectorySequence>& b) {
  if (a.size() != b.size()) throw ShapeError("sequence collections differ in video count");
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].frames.size() != b[i].frames.size()) {
      throw ShapeError("video " + std::to_string(i) + " differs in frame count");
    }
    if (!a[i].frames.empty() && a[i].frames[0].size() != b[i].frames[0].size()) {
      throw ShapeError("video " + std::to_string(i) + " differs in landmark count");
    }
  }
}

LossBreakdown::VideoTerms video_terms(const TrajectorySequence& x, const TrajectorySequence& p,
                                      double lambda3) {
  LossBreakdown::VideoTerms terms;
  const int T = x.num_frames();
  terms.frames = T;
  std::vector<Eigen::VectorXd> xv(T), pv(T);
  for (int t = 0; t < T; ++t) {
    xv[t] = to_vector(x.frames[t]);
    pv[t] = to_vector(p.frames[t]);
  }
  for (int t = 0; t < T; ++t) {
    terms.euclidean_sum += (xv[t] - pv[t]).squaredNorm();
    if (t >= 1) {
      const Eigen::VectorXd v = pv[t] - pv[t - 1];
      const double v2 = v.squaredNorm();
      if (v2 >= kDegenerateMotion) {
        const double coeff = v.dot(xv[t] - pv[t]) / v2;
        terms.delay_sum += coeff * coeff;
        terms.delay_frames += 1;
      }
    }
    if (t >= 1 && t + 1 < T) {
      const double q = closed_form_q(xv[t - 1], xv[t], xv[t + 1], lambda3);
      const Eigen::VectorXd resid = xv[t] - q * xv[t - 1] - (1.0 - q) * xv[t + 1];
      terms.tm_sum += resid.squaredNorm() + lambda3 * (q - 0.5) * (q - 0.5);
      terms.interior_frames += 1;
    }
  }
  return terms;
}

LossBreakdown combine_terms(std::vector<LossBreakdown::VideoTerms> per_video,
                            const TrainConfig& config) {
  LossBreakdown out;
  double euclid_sum = 0.0, delay_sum = 0.0, tm_sum = 0.0;
  long frames = 0, delay_frames = 0, interior = 0;
  for (const auto& v : per_video) {
    euclid_sum += v.euclidean_sum;
    delay_sum += v.delay_sum;
    tm_sum += v.tm_sum;
    frames += v.frames;
    delay_frames += v.delay_frames;
    interior += v.interior_frames;
  }
  out.reg_euclidean = frames > 0 ? euclid_sum / frames : 0.0;
  out.reg_time_delay = delay_frames > 0 ? delay_sum / delay_frames : 0.0;
  out.tm_smooth = interior > 0 ? tm_sum / interior : 0.0;
  out.total = out.reg_euclidean + config.lambda2 * out.reg_time_delay +
              config.lambda1 * out.tm_smooth;
  out.per_video = std::move(per_video);
  return out;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double sigmoid(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }

double inv_softplus(double d) { return d > 30.0 ? d : std::log(std::expm1(d)); }

// Index j of [0, 2M) belongs to group floor(j * G / 2M); groups follow the
// descending-eigenvalue order of the rotated dimensions.
int group_of(int j, int groups, int dims) {
  return static_cast<int>((static_cast<long>(j) * groups) / dims);
}

int effective_groups(int tie_groups, int dims) {
  if (tie_groups <= 0 || tie_groups >= dims) return dims;
  return tie_groups;
}

}  // namespace

RegLoss loss_reg(const std::vector<TrajectorySequence>& x_seqs,
                 const std::vector<TrajectorySequence>& p_seqs) {
  check_aligned(x_seqs, p_seqs);
  double euclid_sum = 0.0, delay_sum = 0.0;
  long frames = 0, delay_frames = 0;
  for (size_t i = 0; i < x_seqs.size(); ++i) {
    const auto terms = video_terms(x_seqs[i], p_seqs[i], 0.0);
    euclid_sum += terms.euclidean_sum;
    delay_sum += terms.delay_sum;
    frames += terms.frames;
    delay_frames += terms.delay_frames;
  }
  RegLoss out;
  out.euclidean = frames > 0 ? euclid_sum / frames : 0.0;
  out.time_delay = delay_frames > 0 ? delay_sum / delay_frames : 0.0;
  return out;
}

double closed_form_q(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& x_cur,
                     const Eigen::VectorXd& x_next, double lambda3) {
  if (x_prev.size() != x_cur.size() || x_cur.size() != x_next.size()) {
    throw ShapeError("closed_form_q operands must have equal length");
  }
  if (lambda3 < 0.0) throw DomainError("lambda3 must be non-negative");
  const Eigen::VectorXd d = x_prev - x_next;
  const Eigen::VectorXd b = x_cur - x_next;
  const double denom = d.squaredNorm() + lambda3;
  if (denom < kDegenerateMotion) return 0.5;
  return (d.dot(b) + 0.5 * lambda3) / denom;
}

double loss_tm(const std::vector<TrajectorySequence>& x_seqs, double lambda3) {
  double tm_sum = 0.0;
  long interior = 0;
  for (const auto& x : x_seqs) {
    const auto terms = video_terms(x, x, lambda3);
    tm_sum += terms.tm_sum;
    interior += terms.interior_frames;
  }
  return interior > 0 ? tm_sum / interior : 0.0;
}

LossBreakdown total_loss(const StabilizerParams& params,
                         const std::vector<TrajectorySequence>& z_seqs,
                         const std::vector<TrajectorySequence>& p_seqs,
                         const TrainConfig& config) {
  check_aligned(z_seqs, p_seqs);
  std::vector<LossBreakdown::VideoTerms> per_video(z_seqs.size());
  for (size_t i = 0; i < z_seqs.size(); ++i) {
    const TrajectorySequence x = stabilize_sequence(params, z_seqs[i]);
    per_video[i] = video_terms(x, p_seqs[i], config.lambda3);
  }
  return combine_terms(std::move(per_video), config);
}

StabilizerParams init_params(const std::vector<TrajectorySequence>& z_seqs,
                             const std::vector<TrajectorySequence>& p_seqs) {
  check_aligned(z_seqs, p_seqs);
  if (z_seqs.empty()) throw InsufficientDataError("no training videos");
  int M = 0;
  for (const auto& s : p_seqs)
    if (s.num_landmarks() > 0) M = s.num_landmarks();
  if (M == 0) throw InsufficientDataError("training videos carry no landmarks");

  // rho: per-coordinate variance of the detector error, averaged over the
  // 2M coordinates.
  const int dims = 2 * M;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dims);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dims);
  long n = 0;
  for (size_t i = 0; i < z_seqs.size(); ++i) {
    for (int t = 0; t < z_seqs[i].num_frames(); ++t) {
      const Eigen::VectorXd e = to_vector(z_seqs[i].frames[t]) - to_vector(p_seqs[i].frames[t]);
      sum += e;
      sum_sq += e.cwiseProduct(e);
      ++n;
    }
  }
  if (n < 1) throw InsufficientDataError("no frames in training videos");
  const Eigen::VectorXd mean = sum / static_cast<double>(n);
  const Eigen::VectorXd var =
      (sum_sq / static_cast<double>(n) - mean.cwiseProduct(mean)).cwiseMax(0.0);
  const double rho = var.mean();

  StabilizerParams params;
  params.K = 2;
  params.M = M;
  params.gamma = 0.5;
  params.alpha = Eigen::VectorXd::Constant(2, 0.5);
  params.beta = Eigen::VectorXd::Constant(2, 0.5);
  params.gamma_noise = Eigen::VectorXd::Constant(dims, std::max(rho, kCovarianceFloor));
  params.gamma_k = {Eigen::VectorXd::Constant(dims, kCovarianceFloor),
                    Eigen::VectorXd::Constant(dims, std::max(10.0 * rho, kCovarianceFloor))};
  params.V = build_eigenbasis(p_seqs);
  params.mode = StabilizerMode::kMapCandidates;
  params.validate();
  return params;
}

Eigen::VectorXd unconstrain_params(const StabilizerParams& params, int tie_groups) {
  const int dims = params.dims();
  const int G = effective_groups(tie_groups, dims);
  const int K = params.K;
  Eigen::VectorXd theta(1 + K + (K - 1) + (K + 1) * G);
  int idx = 0;
  theta[idx++] = logit(params.gamma);
  for (int k = 0; k < K; ++k) theta[idx++] = logit(std::clamp(params.beta[k], 1e-12, 1.0 - 1e-12));
  for (int k = 0; k + 1 < K; ++k) {
    theta[idx++] = std::log(std::max(params.alpha[k], 1e-300)) -
                   std::log(std::max(params.alpha[K - 1], 1e-300));
  }
  auto put_groups = [&](const Eigen::VectorXd& diag) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(G);
    Eigen::VectorXd cnt = Eigen::VectorXd::Zero(G);
    for (int j = 0; j < dims; ++j) {
      acc[group_of(j, G, dims)] += diag[j];
      cnt[group_of(j, G, dims)] += 1.0;
    }
    for (int g = 0; g < G; ++g) {
      theta[idx++] = inv_softplus(std::max(acc[g] / cnt[g], kCovarianceFloor));
    }
  };
  put_groups(params.gamma_noise);
  for (int k = 0; k < K; ++k) put_groups(params.gamma_k[k]);
  return theta;
}

StabilizerParams constrain_params(const Eigen::VectorXd& theta, const StabilizerParams& reference,
                                  int tie_groups) {
  const int dims = reference.dims();
  const int G = effective_groups(tie_groups, dims);
  const int K = reference.K;
  if (theta.size() != 1 + K + (K - 1) + (K + 1) * G) {
    throw ShapeError("unconstrained vector has the wrong length");
  }
  StabilizerParams params = reference;
  int idx = 0;
  params.gamma = sigmoid(theta[idx++]);
  params.beta = Eigen::VectorXd(K);
  for (int k = 0; k < K; ++k) params.beta[k] = sigmoid(theta[idx++]);

  Eigen::VectorXd logits = Eigen::VectorXd::Zero(K);
  for (int k = 0; k + 1 < K; ++k) logits[k] = theta[idx++];
  const double m = logits.maxCoeff();
  Eigen::VectorXd expv = (logits.array() - m).exp();
  params.alpha = expv / expv.sum();

  auto take_groups = [&](Eigen::VectorXd& diag) {
    diag = Eigen::VectorXd(dims);
    for (int g = 0; g < G; ++g) {
      const double value = softplus(theta[idx + g]);
      for (int j = 0; j < dims; ++j) {
        if (group_of(j, G, dims) == g) diag[j] = value;
      }
    }
    idx += G;
  };
  take_groups(params.gamma_noise);
  params.gamma_k.assign(K, Eigen::VectorXd());
  for (int k = 0; k < K; ++k) take_groups(params.gamma_k[k]);
  return params;
}

FitResult fit(const StabilizerParams& params0, const std::vector<TrajectorySequence>& z_seqs,
              const std::vector<TrajectorySequence>& p_seqs, const TrainConfig& config) {
  params0.validate();
  check_aligned(z_seqs, p_seqs);

  const Eigen::VectorXd theta0 = unconstrain_params(params0, config.tie_groups);

  double best_total = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta = theta0;
  LossBreakdown best_breakdown;

  auto objective = [&](const Eigen::VectorXd& theta) -> double {
    LossBreakdown b;
    try {
      const StabilizerParams p = constrain_params(theta, params0, config.tie_groups);
      b = total_loss(p, z_seqs, p_seqs, config);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
    if (std::isfinite(b.total) && b.total < best_total) {
      best_total = b.total;
      best_theta = theta;
      best_breakdown = b;
    }
    return b.total;
  };

  NelderMeadOptions opts;
  opts.max_iters = config.max_iters;
  opts.f_tol = config.f_tol;
  opts.x_tol = config.x_tol;

  std::vector<HistoryRow> history;
  auto on_iteration = [&](int iter, const Eigen::VectorXd&, double) {
    history.push_back({iter, best_breakdown.reg_euclidean, best_breakdown.reg_time_delay,
                       best_breakdown.tm_smooth, best_breakdown.total});
  };

  const NelderMeadResult nm = nelder_mead(objective, theta0, opts, on_iteration);

  if (history.empty() || history.back().total != best_breakdown.total) {
    history.push_back({nm.iterations, best_breakdown.reg_euclidean,
                       best_breakdown.reg_time_delay, best_breakdown.tm_smooth,
                       best_breakdown.total});
  }

  FitResult result;
  result.params = constrain_params(best_theta, params0, config.tie_groups);
  result.final_loss = best_breakdown;
  result.history = std::move(history);
  result.iterations = nm.iterations;
  result.evaluations = nm.evaluations;
  result.stop_reason = nm.stop_reason;
  return result;
}

}  // namespace fhr
