#pragma once

// Reference implementations used only by the test suites. Each one reaches a
// result along a different route than the library code it checks.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <limits>

#include "l1tv/core.hpp"
#include "l1tv/solvers.hpp"

namespace oracles {

using l1tv::Index;
using l1tv::MatrixXd;
using l1tv::VectorXd;

// Largest singular value through a dense SVD.
inline double svd_spectral_norm(const MatrixXd& a) {
  return Eigen::JacobiSVD<MatrixXd>(a).singularValues()(0);
}

// Dense forward-difference matrix (the library never materializes it).
inline MatrixXd dense_diff_matrix(Index n) {
  MatrixXd d = MatrixXd::Zero(n - 1, n);
  for (Index i = 0; i < n - 1; ++i) {
    d(i, i) = -1;
    d(i, i + 1) = 1;
  }
  return d;
}

// Exhaustive minimization of f over a uniform grid on [lo, hi]^dim.
inline std::pair<VectorXd, double> grid_search_min(
    const std::function<double(const VectorXd&)>& f, Index dim, double lo, double hi,
    Index steps) {
  VectorXd point(dim), best_point(dim);
  double best = std::numeric_limits<double>::infinity();
  std::vector<Index> idx(static_cast<std::size_t>(dim), 0);
  const double h = (hi - lo) / static_cast<double>(steps - 1);
  for (;;) {
    for (Index d = 0; d < dim; ++d) point[d] = lo + h * static_cast<double>(idx[d]);
    const double v = f(point);
    if (v < best) {
      best = v;
      best_point = point;
    }
    Index d = 0;
    while (d < dim) {
      if (++idx[d] < steps) break;
      idx[d] = 0;
      ++d;
    }
    if (d == dim) break;
  }
  return {best_point, best};
}

// Objective of the proximal subproblem
//   lam1*||u||_1 + lam2*||Du||_1 + 1/2*||u - x||^2.
inline double prox_objective(const VectorXd& u, const VectorXd& x, double lam1, double lam2) {
  double tv = 0;
  for (Index i = 0; i + 1 < u.size(); ++i) tv += std::abs(u[i + 1] - u[i]);
  return lam1 * u.lpNorm<1>() + lam2 * tv + 0.5 * (u - x).squaredNorm();
}

// Subgradient descent on the (1-strongly-convex) proximal subproblem with the
// classical 2/(k+2) step; returns the best iterate seen.
inline VectorXd prox_reference_subgradient(const VectorXd& x, double lam1, double lam2,
                                           Index iters) {
  const Index n = x.size();
  VectorXd u = x, best = x;
  double best_val = prox_objective(u, x, lam1, lam2);
  for (Index k = 0; k < iters; ++k) {
    VectorXd g = u - x;
    for (Index i = 0; i < n; ++i) g[i] += lam1 * (u[i] > 0 ? 1.0 : (u[i] < 0 ? -1.0 : 0.0));
    for (Index i = 0; i + 1 < n; ++i) {
      const double d = u[i + 1] - u[i];
      const double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
      g[i] -= lam2 * s;
      g[i + 1] += lam2 * s;
    }
    u -= (2.0 / static_cast<double>(k + 2)) * g;
    const double val = prox_objective(u, x, lam1, lam2);
    if (val < best_val) {
      best_val = val;
      best = u;
    }
  }
  return best;
}

// Proximal subgradient reference for the regularized recovery problem:
// gradient step on the quadratic fit with step c/sqrt(k), exact prox of the
// combined penalty, best iterate kept.
inline VectorXd regularized_reference(const l1tv::SensingProblem& p, const l1tv::RegParams& r,
                                      Index iters) {
  const double c = 1.0 / p.spectral_norm_sq;
  VectorXd x = VectorXd::Zero(p.n());
  VectorXd best = x;
  double best_val = l1tv::objective(p, r, x);
  for (Index k = 1; k <= iters; ++k) {
    const double alpha = c / std::sqrt(static_cast<double>(k));
    const VectorXd grad = p.a.transpose() * (p.a * x - p.y);
    x = l1tv::combined_prox(x - alpha * grad, alpha * r.lam1, alpha * r.lam2);
    const double val = l1tv::objective(p, r, x);
    if (val < best_val) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

// Dense weak-Jacobian pair of the TV prox built literally from the
// cumulative-sum matrix restricted to the anchored jump support.
struct DenseTvJacobian {
  MatrixXd j_x;
  VectorXd j_mu;
};

inline DenseTvJacobian dense_tv_jacobian(const l1tv::TautStringResult<double>& res) {
  const Index n = res.z.size();
  MatrixXd l = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) l(i, j) = 1;

  std::vector<Index> support{0};  // the first column anchors the leading segment
  VectorXd signs(static_cast<Index>(res.jump_indices.size()) + 1);
  signs[0] = 0;  // unpenalized coordinate
  for (std::size_t k = 0; k < res.jump_indices.size(); ++k) {
    support.push_back(res.jump_indices[k] + 1);
    signs[static_cast<Index>(k) + 1] = res.jump_signs[k];
  }
  MatrixXd ls(n, static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) ls.col(static_cast<Index>(k)) = l.col(support[k]);
  const MatrixXd gram_inv = (ls.transpose() * ls).inverse();
  DenseTvJacobian out;
  out.j_x = ls * gram_inv * ls.transpose();
  out.j_mu = -ls * gram_inv * signs;
  return out;
}

}  // namespace oracles
