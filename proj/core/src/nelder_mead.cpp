#include "fhr/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fhr/errors.hpp"

namespace fhr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

NelderMeadResult nelder_mead(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts, const IterationCallback& on_iteration) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw DomainError("nelder_mead needs at least one dimension");

  NelderMeadResult result;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };

  std::vector<Eigen::VectorXd> verts(n + 1, x0);
  for (int i = 0; i < n; ++i) {
    if (x0[i] != 0.0) {
      verts[i + 1][i] *= 1.0 + opts.initial_step_rel;
    } else {
      verts[i + 1][i] = opts.initial_step_zero;
    }
  }
  std::vector<double> fv(n + 1);
  for (int i = 0; i <= n; ++i) fv[i] = eval(verts[i]);

  std::vector<int> order(n + 1);
  auto sort_order = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
  };

  int iter = 0;
  std::string reason = "max_iters";
  for (; iter < opts.max_iters; ++iter) {
    sort_order();
    const int best = order[0];
    const int worst = order[n];
    const int second_worst = order[n - 1];

    if (on_iteration) on_iteration(iter, verts[best], fv[best]);

    // Converged when the value spread and the simplex extent are both small.
    // Either alone is unreliable: exact f ties can straddle the optimum, and
    // infinite vertices leave the spread infinite until the simplex re-enters
    // the finite region.
    const double f_spread = fv[worst] - fv[best];
    double x_extent = 0.0;
    for (int i = 0; i <= n; ++i) {
      x_extent = std::max(x_extent, (verts[i] - verts[best]).cwiseAbs().maxCoeff());
    }
    if (std::isfinite(fv[best]) && std::isfinite(f_spread) &&
        std::abs(f_spread) <= opts.f_tol && x_extent <= opts.x_tol) {
      reason = "converged";
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += verts[i];
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + opts.reflection * (centroid - verts[worst]);
    const double fr = eval(reflected);

    if (fr < fv[best]) {
      const Eigen::VectorXd expanded = centroid + opts.expansion * (reflected - centroid);
      const double fe = eval(expanded);
      if (fe < fr) {
        verts[worst] = expanded;
        fv[worst] = fe;
      } else {
        verts[worst] = reflected;
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      verts[worst] = reflected;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      Eigen::VectorXd contracted;
      if (outside) {
        contracted = centroid + opts.contraction * (reflected - centroid);
      } else {
        contracted = centroid - opts.contraction * (centroid - verts[worst]);
      }
      const double fc = eval(contracted);
      if (fc < std::min(fr, fv[worst])) {
        verts[worst] = contracted;
        fv[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          verts[i] = verts[best] + opts.shrink * (verts[i] - verts[best]);
          fv[i] = eval(verts[i]);
        }
      }
    }
  }

  sort_order();
  result.x = verts[order[0]];
  result.f = fv[order[0]];
  result.iterations = iter;
  result.stop_reason = reason;
  return result;
}

}  // namespace fhr
