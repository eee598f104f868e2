#pragma once

#include <vector>

#include "l1tv/core.hpp"
#include "l1tv/prox.hpp"

namespace l1tv {

// Linear measurement model y = A x + e with the squared spectral norm of A
// cached for step-size selection. Immutable after construction.
struct SensingProblem {
  MatrixXd a;
  VectorXd y;
  double spectral_norm_sq = 0;

  SensingProblem(MatrixXd a_in, VectorXd y_in);

  Index m() const { return a.rows(); }
  Index n() const { return a.cols(); }
};

struct RegParams {
  double lam1 = 0;
  double lam2 = 0;

  void validate() const;
};

// Step pair (u, t) of the proximal gradient-mapping iteration. Convergence is
// guaranteed for u in (0, 2/||A||_2^2) and t in (0, u].
struct StepParams {
  double u = 0;
  double t = 0;

  void validate(double spectral_norm_sq) const;
};

struct SolveResult {
  VectorXd x;
  std::vector<double> objective_history;  // length iterations + 1 when recorded
  std::vector<double> residual_history;   // absolute iterate-change norms
  Index iterations = 0;
  bool converged = false;
};

// F(x) = 1/2*||y - A x||^2 + lam1*||x||_1 + lam2*||Dx||_1.
double objective(const SensingProblem& p, const RegParams& r, const VectorXd& x);

// u = safety * (2/||A||_2^2), t = 0.9*u. The default safety 0.5 gives
// u = 1/||A||_2^2.
StepParams default_step_params(const SensingProblem& p, double safety = 0.5);

// Gradient mapping of the smooth part plus the l1 penalty:
// (1/u) * (x - soft_threshold(x - u*A^T(Ax - y), lam1*u)).
// Vanishes exactly at minimizers of 1/2*||y-Ax||^2 + lam1*||x||_1.
VectorXd gradient_mapping(const SensingProblem& p, double lam1, const VectorXd& x, double u);

// Proximal gradient-mapping iteration for F: inner soft-threshold step with
// weight u, outer TV-prox step with weight t,
//   x+ = T_{lam2*t}((1 - t/u)*x + (t/u)*S_{lam1*u}(x - u*A^T(Ax - y))).
// Stops when ||x+ - x|| / max(||x||, 1) < tol or after max_iter iterations.
SolveResult pgm_ista(const SensingProblem& p, const RegParams& r, const StepParams& s,
                     const VectorXd& x0, Index max_iter, double tol,
                     bool record_history = true);

// ||x - T_{lam2*t}(x - t*G(x))||_2; zero exactly at fixed points of the
// iteration above.
double fixed_point_residual(const SensingProblem& p, const RegParams& r,
                            const StepParams& s, const VectorXd& x);

struct AdmmConfig {
  double tol = 1e-8;
  double mu0 = 1e-3;
  double rho = 1.1;
  double mu_max = 1e8;
  Index max_iter = 20000;
  bool record_history = true;
};

// Two-block ADMM for the equality-constrained problem
//   min lam1*||z||_1 + lam2*||Dz||_1  s.t.  A x = y, x = z,
// with x-update through a cached factorization of A^T A + I, z-update through
// the combined prox with thresholds lam1/mu, lam2/mu, dual ascent on both
// multipliers with the current mu, and mu <- min(rho*mu, mu_max) per sweep.
// objective_history records lam1*||x||_1 + lam2*||Dx||_1 at the iterates.
SolveResult admm_constrained(const MatrixXd& a, const VectorXd& y, const RegParams& r,
                             const AdmmConfig& cfg = {});

}  // namespace l1tv
