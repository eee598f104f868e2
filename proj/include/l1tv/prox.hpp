#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "l1tv/core.hpp"

namespace l1tv {

// Elementwise soft threshold: sign(x_i) * max(0, |x_i| - tau).
// Minimizes tau*||u||_1 + 1/2*||u - x||_2^2.
template <typename Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: tau must be nonnegative");
  return (x.array().sign() * (x.array().abs() - tau).max(typename Derived::Scalar(0))).matrix();
}

// Output of the total-variation proximal map together with the jump structure
// needed to apply its weak Jacobians:
//   z               minimizer of mu*||Dz||_1 + 1/2*||z - x||^2
//   segment_support length-n mask, support of [z_1; Dz]: entry 0 marks
//                   z_1 != 0, entry i >= 1 marks a jump between z_{i-1}, z_i
//   jump_indices    difference indices i (0-based, z[i+1] != z[i]), increasing
//   jump_signs      sign(z[i+1] - z[i]) in {-1,+1}, aligned with jump_indices
template <typename Scalar>
struct TautStringResult {
  Vector<Scalar> z;
  Eigen::Array<bool, Eigen::Dynamic, 1> segment_support;
  std::vector<Index> jump_indices;
  std::vector<int> jump_signs;
  Scalar mu = 0;
};

namespace detail {

// Direct taut-string pass (Condat's formulation). Runs in O(n); every
// finished segment is written as one constant value, so within-segment
// differences of the output are exactly zero.
template <typename Scalar>
void tv_denoise(const Scalar* y, Scalar* x, Index n, Scalar lam) {
  if (n == 1) {
    x[0] = y[0];
    return;
  }
  Index k = 0, k0 = 0, km = 0, kp = 0;
  Scalar vmin = y[0] - lam, vmax = y[0] + lam;
  Scalar umin = lam, umax = -lam;
  for (;;) {
    if (k == n - 1) {  // single-sample tail after a forced jump
      x[n - 1] = vmin + umin;
      return;
    }
    while (true) {
      if (y[k + 1] + umin < vmin - lam) {  // lower string breaks: jump down
        for (Index i = k0; i <= km; ++i) x[i] = vmin;
        k = k0 = km = kp = km + 1;
        vmin = y[k];
        vmax = y[k] + 2 * lam;
        umin = lam;
        umax = -lam;
      } else if (y[k + 1] + umax > vmax + lam) {  // upper string breaks: jump up
        for (Index i = k0; i <= kp; ++i) x[i] = vmax;
        k = k0 = km = kp = kp + 1;
        vmin = y[k] - 2 * lam;
        vmax = y[k];
        umin = lam;
        umax = -lam;
      } else {  // strings stay taut: extend the current segment
        ++k;
        umin += y[k] - vmin;
        umax += y[k] - vmax;
        if (umin >= lam) {
          vmin += (umin - lam) / static_cast<Scalar>(k - k0 + 1);
          umin = lam;
          km = k;
        }
        if (umax <= -lam) {
          vmax += (umax + lam) / static_cast<Scalar>(k - k0 + 1);
          umax = -lam;
          kp = k;
        }
      }
      if (k >= n - 1) break;
    }
    if (umin < 0) {  // boundary forces a final down jump
      for (Index i = k0; i <= km; ++i) x[i] = vmin;
      k = k0 = km = km + 1;
      vmin = y[k];
      umin = lam;
      umax = y[k] + lam - vmax;
    } else if (umax > 0) {  // boundary forces a final up jump
      for (Index i = k0; i <= kp; ++i) x[i] = vmax;
      k = k0 = kp = kp + 1;
      vmax = y[k];
      umax = -lam;
      umin = y[k] - lam - vmin;
    } else {  // strings meet: the remainder is one segment
      const Scalar v = vmin + umin / static_cast<Scalar>(k - k0 + 1);
      for (Index i = k0; i < n; ++i) x[i] = v;
      return;
    }
  }
}

}  // namespace detail

// Exact TV proximal map z = argmin_u mu*||Du||_1 + 1/2*||u - x||^2 via the
// taut-string construction, plus the jump support and sign pattern.
// Floating-point jumps are classified with the threshold
// |z_{i+1} - z_i| > 1e-10 * (1 + ||z||_inf).
template <typename Derived>
TautStringResult<typename Derived::Scalar> tv_prox(const Eigen::MatrixBase<Derived>& x,
                                                   typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  if (mu < 0) throw std::invalid_argument("tv_prox: mu must be nonnegative");
  const Index n = x.size();
  if (n < 1) throw std::invalid_argument("tv_prox: empty input");
  if (!x.allFinite()) throw std::invalid_argument("tv_prox: input must be finite");

  TautStringResult<Scalar> res;
  res.mu = mu;
  res.z.resize(n);
  Vector<Scalar> xe = x;  // contiguous copy; accepts expressions
  if (mu == 0) {
    res.z = xe;
  } else {
    detail::tv_denoise(xe.data(), res.z.data(), n, mu);
  }

  const Scalar zmax = res.z.cwiseAbs().maxCoeff();
  const Scalar jump_tol = Scalar(1e-10) * (Scalar(1) + zmax);
  res.segment_support = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, false);
  res.segment_support[0] = std::abs(res.z[0]) > jump_tol;
  for (Index i = 0; i + 1 < n; ++i) {
    const Scalar d = res.z[i + 1] - res.z[i];
    if (std::abs(d) > jump_tol) {
      res.segment_support[i + 1] = true;
      res.jump_indices.push_back(i);
      res.jump_signs.push_back(d > 0 ? 1 : -1);
    }
  }
  return res;
}

// Optimality check for z = tv_prox(x, mu). The dual variable is rebuilt by
// cumulative sums of (z - x)/mu; z is optimal iff the rebuilt w satisfies
// ||w||_inf <= 1, w = sign(jump) on the jump support, and the total sum
// vanishes (mean preservation).
template <typename DerivedX, typename DerivedZ>
bool tv_prox_kkt_check(const Eigen::MatrixBase<DerivedX>& x,
                       typename DerivedX::Scalar mu,
                       const Eigen::MatrixBase<DerivedZ>& z,
                       typename DerivedX::Scalar tol) {
  using Scalar = typename DerivedX::Scalar;
  const Index n = x.size();
  if (z.size() != n) throw std::invalid_argument("tv_prox_kkt_check: size mismatch");
  const Scalar scale = Scalar(1) + x.cwiseAbs().maxCoeff();
  if (mu == 0) return ((z - x).cwiseAbs().maxCoeff() <= tol * scale);
  if (n == 1) return std::abs(z[0] - x[0]) <= tol * scale;

  const Scalar jump_tol = Scalar(1e-10) * (Scalar(1) + z.cwiseAbs().maxCoeff());
  Scalar w = 0;
  for (Index i = 0; i + 1 < n; ++i) {
    w += (z[i] - x[i]) / mu;
    if (std::abs(w) > 1 + tol) return false;
    const Scalar d = z[i + 1] - z[i];
    if (std::abs(d) > jump_tol) {
      const Scalar s = d > 0 ? Scalar(1) : Scalar(-1);
      if (std::abs(w - s) > tol) return false;
    }
  }
  w += (z[n - 1] - x[n - 1]) / mu;
  return std::abs(w) <= tol * scale;  // terminal dual value must vanish
}

// prox of g(x) = lam1*||x||_1 + lam2*||Dx||_1, computed as the composition
// soft_threshold(tv_prox(x, lam2), lam1).
template <typename Derived>
Vector<typename Derived::Scalar> combined_prox(const Eigen::MatrixBase<Derived>& x,
                                               typename Derived::Scalar lam1,
                                               typename Derived::Scalar lam2) {
  if (lam1 < 0 || lam2 < 0)
    throw std::invalid_argument("combined_prox: penalties must be nonnegative");
  return soft_threshold(tv_prox(x, lam2).z, lam1);
}

template <typename Scalar>
struct TvProxVjp {
  Vector<Scalar> grad_x;  // J_x^T * upstream (J_x is symmetric)
  Scalar grad_mu = 0;     // <J_mu, upstream>
};

// Weak-Jacobian vector products of the TV prox at a precomputed result.
// J_x is the orthogonal projector onto vectors piecewise constant on the
// segments of z, applied as per-segment averaging; J_mu is piecewise constant
// on segments with value (s_after - s_before)/len, where s_* are the signs of
// the jumps bounding the segment (0 at the ends of the signal). Both are O(n)
// and match the dense projector L_S (L_S^T L_S)^{-1} L_S^T built from the
// cumulative-sum matrix L. An empty support is treated as one global segment.
template <typename Scalar, typename Derived>
TvProxVjp<Scalar> tv_prox_jacobian_vjp(const TautStringResult<Scalar>& result,
                                       const Eigen::MatrixBase<Derived>& upstream) {
  const Index n = result.z.size();
  if (upstream.size() != n)
    throw std::invalid_argument("tv_prox_jacobian_vjp: upstream size mismatch");
  TvProxVjp<Scalar> out;
  out.grad_x.resize(n);

  const std::size_t num_jumps = result.jump_indices.size();
  Index seg_start = 0;
  Scalar sign_before = 0;
  for (std::size_t j = 0; j <= num_jumps; ++j) {
    const Index seg_end = (j < num_jumps) ? result.jump_indices[j] + 1 : n;  // one past
    const Scalar sign_after = (j < num_jumps) ? Scalar(result.jump_signs[j]) : Scalar(0);
    const Index len = seg_end - seg_start;
    const Scalar sum = upstream.segment(seg_start, len).sum();
    out.grad_x.segment(seg_start, len).setConstant(sum / Scalar(len));
    out.grad_mu += (sign_after - sign_before) / Scalar(len) * sum;
    seg_start = seg_end;
    sign_before = sign_after;
  }
  return out;
}

}  // namespace l1tv
