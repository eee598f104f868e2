#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "l1tv/rng.hpp"

namespace l1tv {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::Index;
using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

// m x n matrix with i.i.d. standard normal entries, filled row by row from
// the seeded stream; same (m, n, seed) gives a bit-identical matrix.
template <typename Scalar = double>
Matrix<Scalar> gaussian_matrix(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gaussian_matrix: sizes must be positive");
  RandomStream rs(seed);
  Matrix<Scalar> a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = static_cast<Scalar>(rs.normal());
  return a;
}

template <typename Scalar = double>
Vector<Scalar> gaussian_vector(Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gaussian_vector: size must be positive");
  RandomStream rs(seed);
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v[i] = static_cast<Scalar>(rs.normal());
  return v;
}

template <typename Scalar>
struct SpectralNormResult {
  Scalar value = 0;      // estimate of the largest singular value
  bool converged = false;
  Index iterations = 0;
};

// Largest singular value by power iteration on A^T A with a seeded start
// vector. Stops once the estimate is relatively stable to `tol`; if that does
// not happen within max_iter, the best estimate is returned with
// converged = false.
template <typename Derived>
SpectralNormResult<typename Derived::Scalar> spectral_norm_full(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar tol = 1e-6,
    Index max_iter = 10000,
    std::uint64_t seed = 0x5eed) {
  using Scalar = typename Derived::Scalar;
  if (tol <= 0) throw std::invalid_argument("spectral_norm: tol must be positive");
  const Index n = a.cols();
  Vector<Scalar> v = gaussian_vector<Scalar>(n, seed);
  Scalar vn = v.norm();
  if (vn == 0) throw std::invalid_argument("spectral_norm: degenerate start");
  v /= vn;
  SpectralNormResult<Scalar> res;
  Scalar sigma_prev = 0;
  for (Index k = 0; k < max_iter; ++k) {
    Vector<Scalar> w = a.transpose() * (a * v);
    const Scalar wn = w.norm();
    if (wn == 0) {  // v in the null space; A itself may still be zero
      res.value = 0;
      res.converged = (a.cwiseAbs().maxCoeff() == Scalar(0));
      res.iterations = k + 1;
      return res;
    }
    const Scalar sigma = std::sqrt(v.dot(w));  // Rayleigh quotient of A^T A
    v = w / wn;
    res.iterations = k + 1;
    if (k > 0 && std::abs(sigma - sigma_prev) <= Scalar(0.5) * tol * sigma) {
      res.value = sigma;
      res.converged = true;
      return res;
    }
    sigma_prev = sigma;
  }
  res.value = sigma_prev;
  res.converged = false;
  return res;
}

template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& a,
                                       typename Derived::Scalar tol = 1e-6,
                                       Index max_iter = 10000) {
  return spectral_norm_full(a, tol, max_iter).value;
}

// Forward difference (D x)_i = x_{i+1} - x_i, i = 0..n-2. The operator is
// never materialized; its spectral norm is at most 2.
template <typename Derived>
Vector<typename Derived::Scalar> diff_apply(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() < 2) throw std::invalid_argument("diff_apply: need length >= 2");
  return x.tail(x.size() - 1) - x.head(x.size() - 1);
}

// Adjoint of the forward difference: <D x, v> == <x, diff_adjoint(v)>.
template <typename Derived>
Vector<typename Derived::Scalar> diff_adjoint(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size() + 1;
  if (n < 2) throw std::invalid_argument("diff_adjoint: need length >= 1");
  Vector<Scalar> out(n);
  out[0] = -v[0];
  for (Index i = 1; i < n - 1; ++i) out[i] = v[i - 1] - v[i];
  out[n - 1] = v[n - 2];
  return out;
}

}  // namespace l1tv
