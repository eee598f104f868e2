#include "l1tv/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "l1tv/prox.hpp"

namespace l1tv {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void BoundQuery::validate() const {
  if (n < 1) throw std::invalid_argument("BoundQuery: n must be positive");
  if (s_r < 0 || s_r > n) throw std::invalid_argument("BoundQuery: s_r out of range");
  if (s_g < 0 || s_g > n - 1) throw std::invalid_argument("BoundQuery: s_g out of range");
  if (s_g > 2 * s_r) throw std::invalid_argument("BoundQuery: s_g exceeds 2*s_r");
  if (lam1 < 0 || lam2 < 0) throw std::invalid_argument("BoundQuery: negative penalty");
  if (lam1 == 0 && lam2 == 0)
    throw std::invalid_argument("BoundQuery: penalties must not both vanish");
  if (t <= 0) throw std::invalid_argument("BoundQuery: t must be positive");
}

double phi(const BoundQuery& q) {
  q.validate();
  const double n = static_cast<double>(q.n);
  const double sr = static_cast<double>(q.s_r);
  const double sg = static_cast<double>(q.s_g);
  const double num_root = q.lam1 * (n - sr) + std::sqrt(2.0) * q.lam2 * (n - 1.0 - sg);
  const double den = 3.0 * n * q.lam1 * q.lam1 +
                     4.0 * (2.0 * n + sg - 4.0) * q.lam2 * q.lam2 +
                     12.0 * q.lam1 * q.lam2 * static_cast<double>(std::min(q.s_r, q.s_g));
  if (den <= 0) throw std::invalid_argument("phi: nonpositive denominator");
  return n - (6.0 / kPi) * num_root * num_root / den;
}

double phi_l1(Index n, Index s_r) {
  if (s_r <= 0 || s_r >= n) throw std::invalid_argument("phi_l1: need 0 < s_r < n");
  const double nn = static_cast<double>(n), sr = static_cast<double>(s_r);
  return nn - (2.0 / kPi) * (nn - sr) * (nn - sr) / nn;
}

double phi_l1_sharp(Index n, Index s_r) {
  if (s_r <= 0 || s_r >= n) throw std::invalid_argument("phi_l1_sharp: need 0 < s_r < n");
  const double nn = static_cast<double>(n), sr = static_cast<double>(s_r);
  return 2.0 * sr * std::log(nn / sr) + 2.0 * sr;
}

double phi_tv(Index n, Index s_g) {
  if (n < 3) throw std::invalid_argument("phi_tv: need n >= 3");
  if (s_g < 0 || s_g >= n - 1) throw std::invalid_argument("phi_tv: need 0 <= s_g < n-1");
  const double nn = static_cast<double>(n), sg = static_cast<double>(s_g);
  return nn - (3.0 / kPi) * (nn - sg - 1.0) * (nn - sg - 1.0) / (2.0 * nn + sg - 4.0);
}

Index sample_bound(double phi_value, double t) {
  if (phi_value < 0) throw std::invalid_argument("sample_bound: phi must be nonnegative");
  if (t <= 0) throw std::invalid_argument("sample_bound: t must be positive");
  const double s = std::sqrt(phi_value) + t;
  const double threshold = s * s + 1.0;
  return static_cast<Index>(std::floor(threshold)) + 1;
}

double recovery_error_bound(Index m, double phi_value, double t, double eps, bool sqrt_phi) {
  if (eps < 0) throw std::invalid_argument("recovery_error_bound: eps must be nonnegative");
  const double width_term = sqrt_phi ? std::sqrt(phi_value) : phi_value;
  const double den = std::sqrt(static_cast<double>(m) - 1.0) - width_term - t;
  if (den <= 0)
    throw std::domain_error("recovery_error_bound: infeasible (nonpositive denominator)");
  return 2.0 * eps / den;
}

double lambda_max(const MatrixXd& a, const VectorXd& y) {
  if (a.rows() != y.size()) throw std::invalid_argument("lambda_max: shape mismatch");
  return (a.transpose() * y).cwiseAbs().maxCoeff();
}

QuadCoeffs lambda_ratio_coeffs(Index n, Index s_r, Index s_g, double n0) {
  if (s_r < 0 || s_r > n || s_g < 0 || s_g > n - 1)
    throw std::invalid_argument("lambda_ratio_coeffs: sparsities out of range");
  const double nn = static_cast<double>(n), sr = static_cast<double>(s_r),
               sg = static_cast<double>(s_g);
  QuadCoeffs q;
  q.a = 2.0 * (nn - sr) * (nn - sr);
  q.b = 4.0 * std::sqrt(2.0) * (nn - sr) * (nn - 1.0 - sg) +
        (3.0 * nn + 12.0 * static_cast<double>(std::min(s_r, s_g))) * n0;
  q.c = 4.0 * (nn - 1.0 - sg) * (nn - 1.0 - sg) + 4.0 * (2.0 * nn + sg - 4.0) * n0;
  return q;
}

McWidthResult mc_width_upper(const VectorXd& x, double lam1, double lam2,
                             Index trials, std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("mc_width_upper: need trials >= 2");
  const Index n = x.size();
  if (n < 2) throw std::invalid_argument("mc_width_upper: need n >= 2");

  const VectorXd dx = diff_apply(x);
  double sum = 0, sumsq = 0;
  VectorXd z1(n), z2(n - 1);
  for (Index trial = 0; trial < trials; ++trial) {
    RandomStream rs(substream_seed(seed, static_cast<std::uint64_t>(trial)));
    VectorXd g(n);
    for (Index i = 0; i < n; ++i) g[i] = rs.normal();
    const VectorXd dg = diff_apply(g);

    for (Index i = 0; i < n; ++i)
      z1[i] = (x[i] != 0) ? (x[i] > 0 ? 1.0 : -1.0) : (g[i] > 0 ? 1.0 : (g[i] < 0 ? -1.0 : 0.0));
    for (Index i = 0; i < n - 1; ++i)
      z2[i] = (dx[i] != 0) ? (dx[i] > 0 ? 1.0 : -1.0)
                           : (dg[i] > 0 ? 1.0 : (dg[i] < 0 ? -1.0 : 0.0));

    const VectorXd v = lam1 * z1 + lam2 * diff_adjoint(z2);
    const double vv = v.squaredNorm();
    double value;
    if (vv == 0) {
      value = g.squaredNorm();
    } else {
      const double tstar = std::max(0.0, g.dot(v) / vv);
      value = (g - tstar * v).squaredNorm();
    }
    sum += value;
    sumsq += value * value;
  }
  McWidthResult res;
  const double nt = static_cast<double>(trials);
  res.mean = sum / nt;
  const double var = std::max(0.0, (sumsq - nt * res.mean * res.mean) / (nt - 1.0));
  res.stderr_ = std::sqrt(var / nt);
  return res;
}

}  // namespace l1tv
