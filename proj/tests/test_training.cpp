#include <doctest.h>

#include <cmath>
#include <vector>

#include "fhr/nelder_mead.hpp"
#include "fhr/rng.hpp"
#include "fhr/synth.hpp"
#include "fhr/training.hpp"
#include "oracles.hpp"

using namespace fhr;

namespace {

TrajectorySequence random_walk(int frames, int M, uint64_t seed, double step = 2.0) {
  Rng rng(seed);
  TrajectorySequence seq;
  LandmarkSet cur;
  for (int m = 0; m < M; ++m) cur.push_back({rng.uniform(20.0, 80.0), rng.uniform(20.0, 80.0)});
  for (int t = 0; t < frames; ++t) {
    seq.frames.push_back(cur);
    for (auto& lm : cur) {
      lm.x += rng.normal(0.0, step);
      lm.y += rng.normal(0.0, step);
    }
  }
  return seq;
}

TrajectorySequence delayed_blend(const TrajectorySequence& p, double alpha) {
  TrajectorySequence x = p;
  for (size_t t = 1; t < p.frames.size(); ++t) {
    for (size_t m = 0; m < p.frames[t].size(); ++m) {
      x.frames[t][m] = p.frames[t - 1][m] * alpha + p.frames[t][m] * (1.0 - alpha);
    }
  }
  return x;
}

}  // namespace

TEST_CASE("loss_reg vanishes when x equals p") {
  const TrajectorySequence p = random_walk(50, 3, 101);
  const RegLoss loss = loss_reg({p}, {p});
  CHECK(loss.euclidean == 0.0);
  CHECK(loss.time_delay == 0.0);
}

TEST_CASE("delaying p by a fraction alpha yields time_delay = alpha^2 exactly") {
  const TrajectorySequence p = random_walk(80, 2, 103);
  for (const double alpha : {0.0, 0.25, 0.3, 0.5, 1.0}) {
    const TrajectorySequence x = delayed_blend(p, alpha);
    const RegLoss loss = loss_reg({x}, {p});
    CAPTURE(alpha);
    CHECK(std::abs(loss.time_delay - alpha * alpha) <= 1e-12);
  }
}

TEST_CASE("offsets perpendicular to the motion carry no delay penalty") {
  TrajectorySequence p;
  for (int t = 0; t < 30; ++t) p.frames.push_back({{10.0 + t, 50.0}});
  TrajectorySequence x = p;
  for (auto& frame : x.frames) frame[0].y += 3.0;
  const RegLoss loss = loss_reg({x}, {p});
  CHECK(loss.time_delay == 0.0);
  CHECK(loss.euclidean == doctest::Approx(9.0));
}

TEST_CASE("degenerate ground-truth motion is excluded from the delay mean") {
  TrajectorySequence p;
  p.frames.assign(10, {{5.0, 5.0}});  // static: every v is zero
  TrajectorySequence x = p;
  for (auto& frame : x.frames) frame[0].x += 1.0;
  const RegLoss loss = loss_reg({x}, {p});
  CHECK(loss.time_delay == 0.0);
  CHECK(loss.euclidean == doctest::Approx(1.0));
}

TEST_CASE("closed_form_q analytic cases") {
  const Eigen::Vector2d prev(0.0, 0.0), next(4.0, 0.0);

  // Large lambda3 pins q to the midpoint.
  CHECK(closed_form_q(prev, Eigen::Vector2d(1.0, 2.0), next, 1e12) ==
        doctest::Approx(0.5).epsilon(1e-6));

  // lambda3 = 0 recovers the segment parameter exactly.
  for (const double q0 : {-0.5, 0.0, 0.25, 0.8, 1.5}) {
    const Eigen::Vector2d cur = q0 * prev + (1.0 - q0) * next;
    CHECK(closed_form_q(prev, cur, next, 0.0) == doctest::Approx(q0).epsilon(1e-12));
  }

  // Coincident endpoints fall back to 1/2.
  CHECK(closed_form_q(prev, Eigen::Vector2d(1.0, 1.0), prev, 0.0) == 0.5);
}

TEST_CASE("closed_form_q equals brute-force grid minimization") {
  Rng rng(107);
  for (const double lambda3 : {0.0, 1.0, 10.0, 1e12}) {
    for (int trial = 0; trial < 100; ++trial) {
      // Random triples built around a segment parameter in [-0.5, 1.5] plus a
      // displacement, so the unconstrained minimizer stays inside the grid.
      Eigen::VectorXd prev(4), next(4), off(4);
      for (int j = 0; j < 4; ++j) {
        prev[j] = rng.normal(0.0, 2.0);
        next[j] = rng.normal(0.0, 2.0);
        off[j] = rng.normal(0.0, 0.5);
      }
      const double q0 = rng.uniform(-0.5, 1.5);
      const Eigen::VectorXd cur = q0 * prev + (1.0 - q0) * next + off;
      const double q_star = closed_form_q(prev, cur, next, lambda3);
      auto objective = [&](double q) {
        return (cur - q * prev - (1.0 - q) * next).squaredNorm() +
               lambda3 * (q - 0.5) * (q - 0.5);
      };
      const double q_grid = oracles::grid_argmin(objective, -2.0, 3.0, 1e-4);
      CAPTURE(lambda3);
      CHECK(std::abs(q_star - q_grid) <= 1e-4);
    }
  }
}

TEST_CASE("loss_tm on collinear equally spaced motion is zero") {
  TrajectorySequence x;
  for (int t = 0; t < 20; ++t) x.frames.push_back({{1.5 * t, 2.0 * t}});
  CHECK(loss_tm({x}, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("midpoint displacement costs h^2 in the large-lambda3 limit") {
  TrajectorySequence x;
  x.frames = {{{0.0, 0.0}}, {{1.0, 0.7}}, {{2.0, 0.0}}};  // h = 0.7 off the midpoint
  CHECK(loss_tm({x}, 1e12) == doctest::Approx(0.49).epsilon(1e-6));
}

TEST_CASE("loss_tm limits match the midpoint and line-distance formulas") {
  const TrajectorySequence x = random_walk(60, 2, 109);

  double midpoint = 0.0, line = 0.0;
  long interior = 0;
  for (size_t t = 1; t + 1 < x.frames.size(); ++t) {
    const Eigen::VectorXd prev = to_vector(x.frames[t - 1]);
    const Eigen::VectorXd cur = to_vector(x.frames[t]);
    const Eigen::VectorXd next = to_vector(x.frames[t + 1]);
    midpoint += (cur - 0.5 * (prev + next)).squaredNorm();
    const Eigen::VectorXd d = prev - next;
    const Eigen::VectorXd r = cur - next;
    if (d.squaredNorm() < 1e-12) {
      line += (cur - 0.5 * (prev + next)).squaredNorm();
    } else {
      line += (r - (d.dot(r) / d.squaredNorm()) * d).squaredNorm();
    }
    ++interior;
  }
  midpoint /= static_cast<double>(interior);
  line /= static_cast<double>(interior);

  CHECK(loss_tm({x}, 1e12) == doctest::Approx(midpoint).epsilon(1e-6));
  CHECK(loss_tm({x}, 0.0) == doctest::Approx(line).epsilon(1e-9));
}

TEST_CASE("total_loss composes the terms per the breakdown identity") {
  BenchmarkConfig config;
  config.train_videos = 2;
  config.test_videos = 0;
  config.frames = 40;
  config.num_landmarks = 2;
  const Benchmark bench = make_benchmark(config, 13);
  const StabilizerParams params = init_params(bench.train_z, bench.train_p);

  TrainConfig tc;
  tc.lambda1 = 0.7;
  tc.lambda2 = 4.0;
  tc.lambda3 = 1.0;
  const LossBreakdown loss = total_loss(params, bench.train_z, bench.train_p, tc);
  CHECK(loss.total ==
        doctest::Approx(loss.reg_euclidean + tc.lambda2 * loss.reg_time_delay +
                        tc.lambda1 * loss.tm_smooth)
            .epsilon(1e-12));
  CHECK(loss.per_video.size() == 2);

  TrainConfig no_tm = tc;
  no_tm.lambda1 = 0.0;
  const LossBreakdown reg_only = total_loss(params, bench.train_z, bench.train_p, no_tm);
  CHECK(reg_only.total ==
        doctest::Approx(reg_only.reg_euclidean + no_tm.lambda2 * reg_only.reg_time_delay)
            .epsilon(1e-12));
}

TEST_CASE("a pass-through stabilizer on clean data has (near) zero loss") {
  // Static ground truth: the prior mean equals the observation, so the
  // output is exact and every term vanishes identically.
  TrajectorySequence flat;
  flat.frames.assign(50, {{100.0, 200.0}});
  StabilizerParams params = init_params({flat}, {flat});
  params.gamma_noise = Eigen::VectorXd::Constant(2, kNoiseFloor);
  CHECK(total_loss(params, {flat}, {flat}, TrainConfig{}).total == 0.0);

  // Collinear motion: the early-frame prior still carries the covariance
  // floor, so the pass-through is only exact up to the floor ratio.
  TrajectorySequence ramp;
  for (int t = 0; t < 50; ++t) ramp.frames.push_back({{100.0 + 0.5 * t, 200.0 + 0.25 * t}});
  StabilizerParams ramp_params = init_params({ramp}, {ramp});
  ramp_params.gamma_noise = Eigen::VectorXd::Constant(2, kNoiseFloor);
  CHECK(total_loss(ramp_params, {ramp}, {ramp}, TrainConfig{}).total < 1e-6);
}

TEST_CASE("init_params follows the documented initialization") {
  // Exact data: rho = 0, everything at the floor.
  const TrajectorySequence p = random_walk(50, 2, 211);
  const StabilizerParams exact = init_params({p}, {p});
  CHECK(exact.gamma == 0.5);
  CHECK(exact.beta[0] == 0.5);
  CHECK(exact.beta[1] == 0.5);
  CHECK(exact.alpha[0] == 0.5);
  CHECK(exact.alpha[1] == 0.5);
  CHECK(exact.gamma_noise.maxCoeff() == doctest::Approx(kCovarianceFloor));
  CHECK(exact.gamma_k[0].maxCoeff() == doctest::Approx(kCovarianceFloor));
  CHECK(exact.gamma_k[1].maxCoeff() == doctest::Approx(kCovarianceFloor));

  // Noisy data: rho close to the injected variance, gamma_2 = 10 rho.
  const TrajectorySequence long_p = random_walk(2000, 2, 223);
  NoiseSpec noise;
  noise.coordinate_noise_std = 2.0;
  noise.seed = 7;
  const TrajectorySequence z = corrupt(long_p, noise);
  const StabilizerParams params = init_params({z}, {long_p});
  CHECK(params.gamma_noise[0] == doctest::Approx(4.0).epsilon(0.1));
  CHECK(params.gamma_k[1][0] == doctest::Approx(10.0 * params.gamma_noise[0]).epsilon(1e-12));
  CHECK(params.gamma_k[0].maxCoeff() == doctest::Approx(kCovarianceFloor));
}

TEST_CASE("reparameterization round-trips to 1e-10") {
  BenchmarkConfig config;
  config.train_videos = 2;
  config.test_videos = 0;
  config.frames = 40;
  config.num_landmarks = 3;
  const Benchmark bench = make_benchmark(config, 17);
  const StabilizerParams params = init_params(bench.train_z, bench.train_p);

  for (const int groups : {4, 0}) {
    const Eigen::VectorXd theta = unconstrain_params(params, groups);
    const StabilizerParams back = constrain_params(theta, params, groups);
    CAPTURE(groups);
    CHECK(std::abs(back.gamma - params.gamma) < 1e-10);
    CHECK((back.alpha - params.alpha).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((back.beta - params.beta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((back.gamma_noise - params.gamma_noise).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k < params.K; ++k) {
      CHECK((back.gamma_k[k] - params.gamma_k[k]).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK(back.V == params.V);
  }
}

TEST_CASE("nelder_mead solves Rosenbrock from the classic start") {
  auto rosenbrock = [](const Eigen::VectorXd& x) {
    return 100.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1.0 - x[0]) * (1.0 - x[0]);
  };
  NelderMeadOptions opts;
  opts.max_iters = 5000;
  opts.f_tol = 1e-12;
  opts.x_tol = 1e-10;
  const NelderMeadResult res = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), opts);
  CHECK(std::abs(res.x[0] - 1.0) < 1e-4);
  CHECK(std::abs(res.x[1] - 1.0) < 1e-4);
  CHECK(res.evaluations <= 5000);
}

TEST_CASE("nelder_mead survives non-finite objective regions") {
  auto partial = [](const Eigen::VectorXd& x) {
    if (std::abs(x[0]) > 10.0) return std::numeric_limits<double>::quiet_NaN();
    return (x[0] - 3.0) * (x[0] - 3.0);
  };
  const NelderMeadResult res = nelder_mead(partial, Eigen::VectorXd::Constant(1, 8.0));
  CHECK(std::abs(res.x[0] - 3.0) < 1e-6);
}

TEST_CASE("fit improves on the initialization and records a monotone history") {
  BenchmarkConfig config;
  config.train_videos = 2;
  config.test_videos = 0;
  config.frames = 50;
  config.num_landmarks = 2;
  config.noise_levels = {1.5};
  const Benchmark bench = make_benchmark(config, 19);

  const StabilizerParams params0 = init_params(bench.train_z, bench.train_p);
  TrainConfig tc;
  tc.max_iters = 40;
  const LossBreakdown initial = total_loss(params0, bench.train_z, bench.train_p, tc);

  const FitResult result = fit(params0, bench.train_z, bench.train_p, tc);
  CHECK(result.final_loss.total <= initial.total);
  REQUIRE(!result.history.empty());
  for (size_t i = 1; i < result.history.size(); ++i) {
    CHECK(result.history[i].total <= result.history[i - 1].total);
  }
  for (const auto& row : result.history) {
    CHECK(row.total == doctest::Approx(row.reg_euclidean + tc.lambda2 * row.reg_time_delay +
                                       tc.lambda1 * row.tm_smooth)
                           .epsilon(1e-9));
  }
  CHECK_NOTHROW(result.params.validate());
}
