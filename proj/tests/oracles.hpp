#pragma once

// Independent reference implementations used only to check the library.
// These deliberately avoid the code paths they verify: the eigensolver is a
// hand-rolled Jacobi sweep, densities are evaluated with full covariance
// matrices, and minimizations are plain grid searches.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns eigenvalues
// in descending order and the matching eigenvectors as matrix rows.
struct JacobiResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors_rows;
};

inline JacobiResult jacobi_eigen(Eigen::MatrixXd a, int sweeps = 100, double tol = 1e-14) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < tol) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n);
        j(p, p) = c;
        j(q, q) = c;
        j(p, q) = s;
        j(q, p) = -s;
        a = j.transpose() * a * j;
        v = v * j;
      }
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y); });
  JacobiResult res;
  res.eigenvalues = Eigen::VectorXd(n);
  res.eigenvectors_rows = Eigen::MatrixXd(n, n);
  for (int i = 0; i < n; ++i) {
    res.eigenvalues[i] = a(order[i], order[i]);
    res.eigenvectors_rows.row(i) = v.col(order[i]).transpose();
  }
  return res;
}

// Full-covariance multivariate normal density.
inline double mvn_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                          const Eigen::MatrixXd& cov) {
  const int n = static_cast<int>(x.size());
  const Eigen::MatrixXd inv = cov.inverse();
  const double det = cov.determinant();
  const double quad = (x - mean).dot(inv * (x - mean));
  return std::exp(-0.5 * quad) /
         std::sqrt(std::pow(2.0 * std::numbers::pi, n) * det);
}

// Grid minimization of f over [lo, hi] with the given step; returns arg min.
template <typename F>
double grid_argmin(F&& f, double lo, double hi, double step) {
  double best_q = lo, best_f = f(lo);
  for (double q = lo; q <= hi + 0.5 * step; q += step) {
    const double val = f(q);
    if (val < best_f) {
      best_f = val;
      best_q = q;
    }
  }
  return best_q;
}

}  // namespace oracles
