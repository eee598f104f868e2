#include "l1tv/solvers.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace l1tv {

SensingProblem::SensingProblem(MatrixXd a_in, VectorXd y_in)
    : a(std::move(a_in)), y(std::move(y_in)) {
  if (a.rows() < 1 || a.cols() < 2)
    throw std::invalid_argument("SensingProblem: need m >= 1 and n >= 2");
  if (a.rows() != y.size()) throw std::invalid_argument("SensingProblem: shape mismatch");
  const double sigma = spectral_norm(a);
  spectral_norm_sq = sigma * sigma;
}

void RegParams::validate() const {
  if (lam1 < 0 || lam2 < 0) throw std::invalid_argument("RegParams: negative penalty");
}

void StepParams::validate(double spectral_norm_sq) const {
  if (spectral_norm_sq <= 0) throw std::invalid_argument("StepParams: need ||A||^2 > 0");
  if (!(u > 0) || !(u < 2.0 / spectral_norm_sq))
    throw std::invalid_argument("StepParams: u outside (0, 2/||A||_2^2)");
  if (!(t > 0) || !(t <= u)) throw std::invalid_argument("StepParams: t outside (0, u]");
}

double objective(const SensingProblem& p, const RegParams& r, const VectorXd& x) {
  if (x.size() != p.n()) throw std::invalid_argument("objective: size mismatch");
  const double fit = 0.5 * (p.y - p.a * x).squaredNorm();
  return fit + r.lam1 * x.lpNorm<1>() + r.lam2 * diff_apply(x).lpNorm<1>();
}

StepParams default_step_params(const SensingProblem& p, double safety) {
  if (!(safety > 0) || !(safety < 1))
    throw std::invalid_argument("default_step_params: safety outside (0,1)");
  StepParams s;
  s.u = safety * 2.0 / p.spectral_norm_sq;
  s.t = 0.9 * s.u;
  return s;
}

VectorXd gradient_mapping(const SensingProblem& p, double lam1, const VectorXd& x, double u) {
  if (u <= 0) throw std::invalid_argument("gradient_mapping: u must be positive");
  const VectorXd grad = p.a.transpose() * (p.a * x - p.y);
  return (x - soft_threshold(x - u * grad, lam1 * u)) / u;
}

SolveResult pgm_ista(const SensingProblem& p, const RegParams& r, const StepParams& s,
                     const VectorXd& x0, Index max_iter, double tol, bool record_history) {
  r.validate();
  s.validate(p.spectral_norm_sq);
  if (x0.size() != p.n()) throw std::invalid_argument("pgm_ista: x0 size mismatch");

  SolveResult res;
  res.x = x0;
  if (record_history) res.objective_history.push_back(objective(p, r, res.x));
  const double ratio = s.t / s.u;
  for (Index k = 0; k < max_iter; ++k) {
    const VectorXd grad = p.a.transpose() * (p.a * res.x - p.y);
    const VectorXd shrunk = soft_threshold(res.x - s.u * grad, r.lam1 * s.u);
    const VectorXd w = (1.0 - ratio) * res.x + ratio * shrunk;
    VectorXd x_next = tv_prox(w, r.lam2 * s.t).z;
    const double change = (x_next - res.x).norm();
    const double rel = change / std::max(res.x.norm(), 1.0);
    res.x.swap(x_next);
    ++res.iterations;
    if (record_history) {
      res.residual_history.push_back(change);
      res.objective_history.push_back(objective(p, r, res.x));
    }
    if (rel < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double fixed_point_residual(const SensingProblem& p, const RegParams& r,
                            const StepParams& s, const VectorXd& x) {
  const VectorXd g = gradient_mapping(p, r.lam1, x, s.u);
  const VectorXd mapped = tv_prox(x - s.t * g, r.lam2 * s.t).z;
  return (x - mapped).norm();
}

SolveResult admm_constrained(const MatrixXd& a, const VectorXd& y, const RegParams& r,
                             const AdmmConfig& cfg) {
  r.validate();
  const Index n = a.cols();
  if (a.rows() != y.size()) throw std::invalid_argument("admm_constrained: shape mismatch");

  // mu cancels out of the quadratic term, so one factorization serves all
  // iterations.
  const MatrixXd gram = a.transpose() * a + MatrixXd::Identity(n, n);
  const Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("admm_constrained: factorization of A^T A + I failed");
  const VectorXd aty = a.transpose() * y;

  VectorXd x = VectorXd::Zero(n);
  VectorXd z = VectorXd::Zero(n);
  VectorXd u_dual = VectorXd::Zero(a.rows());
  VectorXd v_dual = VectorXd::Zero(n);
  double mu = cfg.mu0;

  SolveResult res;
  auto penalty = [&](const VectorXd& w) {
    return r.lam1 * w.lpNorm<1>() + r.lam2 * diff_apply(w).lpNorm<1>();
  };
  if (cfg.record_history) res.objective_history.push_back(penalty(x));

  for (Index k = 0; k < cfg.max_iter; ++k) {
    const VectorXd x_next =
        llt.solve(aty + z - (a.transpose() * u_dual) / mu - v_dual / mu);
    z = combined_prox(x_next + v_dual / mu, r.lam1 / mu, r.lam2 / mu);
    u_dual += mu * (a * x_next - y);
    v_dual += mu * (x_next - z);
    mu = std::min(cfg.rho * mu, cfg.mu_max);

    const double change = (x_next - x).norm();
    const double rel = change / std::max(x.norm(), 1.0);
    x = x_next;
    ++res.iterations;
    if (cfg.record_history) {
      res.residual_history.push_back(change);
      res.objective_history.push_back(penalty(x));
    }
    if (rel < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  return res;
}

}  // namespace l1tv
