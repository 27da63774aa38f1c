#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace fhr {

struct NelderMeadOptions {
  int max_iters = 2000;
  // Converged when the value spread is below f_tol AND the simplex extent is
  // below x_tol (fminsearch-style joint test).
  double f_tol = 1e-10;
  double x_tol = 1e-8;
  // Standard coefficients.
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  // Initial simplex: each vertex perturbs one coordinate of x0.
  double initial_step_rel = 0.05;
  double initial_step_zero = 0.00025;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  std::string stop_reason;  // "converged" or "max_iters"
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
// Called once per iteration with (iteration, best_x, best_f).
using IterationCallback = std::function<void(int, const Eigen::VectorXd&, double)>;

// Downhill simplex minimization. Non-finite objective values are treated as
// +infinity so the search continues around them.
NelderMeadResult nelder_mead(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts = {},
                             const IterationCallback& on_iteration = nullptr);

}  // namespace fhr
