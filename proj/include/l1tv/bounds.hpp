#pragma once

#include <cstdint>
#include <utility>

#include "l1tv/core.hpp"

namespace l1tv {

// Inputs of the sample-complexity bounds: signal length n, sparsity s_r,
// gradient sparsity s_g, penalty weights (lam1, lam2) and tail parameter t.
struct BoundQuery {
  Index n = 0;
  Index s_r = 0;
  Index s_g = 0;
  double lam1 = 0;
  double lam2 = 0;
  double t = 1.0;

  void validate() const;
};

// Closed-form upper bound on the statistical dimension of the descent cone of
// lam1*||.||_1 + lam2*||.||_TV at a signal with sparsity pattern (s_r, s_g):
//   n - (6/pi) * [lam1*(n-s_r) + sqrt(2)*lam2*(n-1-s_g)]^2
//             / [3n*lam1^2 + 4*(2n+s_g-4)*lam2^2 + 12*lam1*lam2*min(s_r,s_g)].
// Depends on (lam1, lam2) only through their ratio.
double phi(const BoundQuery& q);

// l1-only specializations: phi_l1 is the lam2 = 0 reduction of phi,
// phi_l1_sharp the classical 2*s_r*log(n/s_r) + 2*s_r bound.
double phi_l1(Index n, Index s_r);
double phi_l1_sharp(Index n, Index s_r);

// TV-only reduction of phi (lam1 = 0).
double phi_tv(Index n, Index s_g);

// Smallest integer m with m > (sqrt(phi) + t)^2 + 1.
Index sample_bound(double phi_value, double t);

// Recovery error bound 2*eps / (sqrt(m-1) - sqrt(phi) - t). The square root
// on phi keeps the expression dimensionally consistent with the width-based
// sampling condition; `sqrt_phi = false` evaluates the raw variant without it.
double recovery_error_bound(Index m, double phi_value, double t, double eps,
                            bool sqrt_phi = true);

// Smallest penalty magnitude ||A^T y||_inf at which 0 solves the regularized
// problem with lam2 = 0.
double lambda_max(const MatrixXd& a, const VectorXd& y);

// Coefficients (a, b, c) of the quadratic a*rho^2 + b*rho + c >= 0 in
// rho = lam1/lam2 associated with the level condition phi <= n0:
//   a = 2*(n-s_r)^2
//   b = 4*sqrt(2)*(n-s_r)*(n-1-s_g) + (3n + 12*min(s_r,s_g))*n0
//   c = 4*(n-1-s_g)^2 + 4*(2n+s_g-4)*n0
struct QuadCoeffs {
  double a = 0, b = 0, c = 0;
};
QuadCoeffs lambda_ratio_coeffs(Index n, Index s_r, Index s_g, double n0);

struct McWidthResult {
  double mean = 0;
  double stderr_ = 0;
};

// Monte-Carlo estimate of E[ min_{t>=0} ||g - t*v(g)||^2 ] where, per draw
// g ~ N(0, I_n), v = lam1*z1 + lam2*D^T z2 with
//   z1 = sign(x) on supp(x),  sign(g) elsewhere,
//   z2 = sign(Dx) on supp(Dx), sign(Dg) elsewhere,
// and the minimum over t is taken in closed form. The sample mean lower-bounds
// the quantity that phi upper-bounds, so mean <= phi(...) up to sampling
// noise. Trial i draws from substream (seed, i); a draw with v = 0 contributes
// ||g||^2.
McWidthResult mc_width_upper(const VectorXd& x, double lam1, double lam2,
                             Index trials, std::uint64_t seed);

}  // namespace l1tv
