#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "l1tv/signals.hpp"
#include "l1tv/solvers.hpp"
#include "oracles.hpp"

using namespace l1tv;

namespace {

SensingProblem random_problem(Index m, Index n, std::uint64_t seed, Index s_r = 0) {
  const MatrixXd a = gaussian_matrix(m, n, seed);
  VectorXd x;
  if (s_r > 0) {
    x = synth_signal(n, s_r, 0, seed + 1).values;
  } else {
    x = gaussian_vector(n, seed + 1);
  }
  return SensingProblem(a, a * x);
}

}  // namespace

TEST_CASE("objective values and naive recomputation") {
  SensingProblem p = random_problem(6, 10, 1);
  RegParams r{0.3, 0.7};
  CHECK(objective(p, r, VectorXd::Zero(10)) ==
        doctest::Approx(0.5 * p.y.squaredNorm()).epsilon(1e-15));

  const VectorXd x = gaussian_vector(10, 9);
  SensingProblem exact(p.a, p.a * x);
  CHECK(objective(exact, RegParams{0, 0}, x) <= 1e-18);

  // term-by-term recomputation
  double fit = 0;
  for (Index i = 0; i < p.m(); ++i) {
    double row = 0;
    for (Index j = 0; j < p.n(); ++j) row += p.a(i, j) * x[j];
    fit += (p.y[i] - row) * (p.y[i] - row);
  }
  double l1 = 0, tv = 0;
  for (Index j = 0; j < p.n(); ++j) l1 += std::abs(x[j]);
  for (Index j = 0; j + 1 < p.n(); ++j) tv += std::abs(x[j + 1] - x[j]);
  const double naive = 0.5 * fit + r.lam1 * l1 + r.lam2 * tv;
  CHECK(objective(p, r, x) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("default step parameters") {
  SensingProblem p = random_problem(8, 12, 2);
  const StepParams s = default_step_params(p);
  CHECK(s.u == doctest::Approx(1.0 / p.spectral_norm_sq).epsilon(1e-12));
  CHECK(s.t == doctest::Approx(0.9 * s.u).epsilon(1e-15));
  CHECK_NOTHROW(s.validate(p.spectral_norm_sq));

  // u = safety * 2 / ||A||^2 with ||A||^2 = 4 gives (0.25, 0.225)
  MatrixXd twoI = 2.0 * MatrixXd::Identity(3, 3);
  SensingProblem p2(twoI, VectorXd::Zero(3));
  const StepParams s2 = default_step_params(p2, 0.5);
  CHECK(s2.u == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(s2.t == doctest::Approx(0.225).epsilon(1e-6));
}

TEST_CASE("step parameter validation enforces the convergence range") {
  SensingProblem p = random_problem(6, 9, 3);
  const double cap = 2.0 / p.spectral_norm_sq;
  const StepParams too_big{cap * 1.01, cap / 2};
  CHECK_THROWS_AS(too_big.validate(p.spectral_norm_sq), std::invalid_argument);
  const StepParams t_above_u{cap / 2, cap};
  CHECK_THROWS_AS(t_above_u.validate(p.spectral_norm_sq), std::invalid_argument);
  const RegParams r_ok{0.1, 0.1};
  const StepParams degenerate{0.0, 0.0};
  CHECK_THROWS_AS(pgm_ista(p, r_ok, degenerate, VectorXd::Zero(9), 10, 1e-6),
                  std::invalid_argument);
}

TEST_CASE("pgm-ista fixed point at zero data") {
  const MatrixXd a = gaussian_matrix(5, 8, 4);
  SensingProblem p(a, VectorXd::Zero(5));
  const SolveResult res = pgm_ista(p, RegParams{0.2, 0.2}, default_step_params(p),
                                   VectorXd::Zero(8), 100, 1e-10);
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.x.norm() == 0.0);
  CHECK(res.objective_history.size() == static_cast<std::size_t>(res.iterations) + 1);
}

TEST_CASE("pgm-ista matches the diminishing-step reference") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SensingProblem p = random_problem(6, 8, 100 + seed, 3);
    RegParams r{0.05, 0.05};
    const SolveResult sol =
        pgm_ista(p, r, default_step_params(p), VectorXd::Zero(8), 200000, 1e-13);
    const VectorXd ref = oracles::regularized_reference(p, r, 100000);
    CHECK(objective(p, r, sol.x) <= objective(p, r, ref) + 1e-5);
    CHECK(std::abs(objective(p, r, sol.x) - objective(p, r, ref)) <= 1e-5);
  }
}

TEST_CASE("reference solver agrees with grid search on n = 2") {
  const MatrixXd a = gaussian_matrix(2, 2, 77);
  const VectorXd y = a * gaussian_vector(2, 78);
  SensingProblem p(a, y);
  RegParams r{0.2, 0.3};
  const VectorXd ref = oracles::regularized_reference(p, r, 100000);
  const auto [point, best] = oracles::grid_search_min(
      [&](const VectorXd& x) { return objective(p, r, x); }, 2, -4.0, 4.0, 801);
  CHECK(objective(p, r, ref) <= best + 1e-4);
}

TEST_CASE("pgm-ista iterates are Fejer monotone") {
  SensingProblem p = random_problem(10, 16, 21, 5);
  RegParams r{0.1, 0.1};
  const StepParams s = default_step_params(p);
  const SolveResult full = pgm_ista(p, r, s, VectorXd::Zero(16), 50000, 1e-13);
  const VectorXd x_inf = full.x;

  VectorXd x = VectorXd::Zero(16);
  double prev = (x - x_inf).norm();
  const double ratio = s.t / s.u;
  for (int k = 0; k < 300; ++k) {
    const VectorXd shrunk =
        soft_threshold(x - s.u * (p.a.transpose() * (p.a * x - p.y)), r.lam1 * s.u);
    x = tv_prox((1.0 - ratio) * x + ratio * shrunk, r.lam2 * s.t).z;
    const double cur = (x - x_inf).norm();
    CHECK(cur <= prev + 1e-10);
    prev = cur;
  }
}

TEST_CASE("smaller u reaches a lower objective plateau") {
  SensingProblem p = random_problem(8, 12, 33, 4);
  RegParams r{0.05, 0.05};
  const double cap = 2.0 / p.spectral_norm_sq;
  auto run_until = [&](double u) {
    StepParams s{u, 0.7 * u};
    const double eps = 1e-6;
    VectorXd x = VectorXd::Zero(12);
    for (int k = 0; k < 2000000; ++k) {
      const double ratio = s.t / s.u;
      const VectorXd shrunk =
          soft_threshold(x - s.u * (p.a.transpose() * (p.a * x - p.y)), r.lam1 * s.u);
      VectorXd nx = tv_prox((1.0 - ratio) * x + ratio * shrunk, r.lam2 * s.t).z;
      const double change = (nx - x).norm();
      x = nx;
      if (change <= s.t * eps) break;
    }
    return objective(p, r, x);
  };
  const double big = run_until(0.8 * cap);
  const double small = run_until(0.2 * cap);
  CHECK(small <= big + 1e-8);
}

TEST_CASE("lam2 = 0 and t = u reduce to plain ista step-for-step") {
  SensingProblem p = random_problem(7, 11, 55);
  RegParams r{0.15, 0.0};
  const double u = 1.0 / p.spectral_norm_sq;
  StepParams s{u, u};
  const SolveResult sol = pgm_ista(p, r, s, VectorXd::Zero(11), 40, 0.0);

  VectorXd x = VectorXd::Zero(11);
  for (int k = 0; k < 40; ++k)
    x = soft_threshold(x - u * (p.a.transpose() * (p.a * x - p.y)), r.lam1 * u);
  CHECK((sol.x - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fixed point residual") {
  SensingProblem p = random_problem(6, 9, 71, 3);
  RegParams r{0.1, 0.1};
  const StepParams s = default_step_params(p);
  const SolveResult sol = pgm_ista(p, r, s, VectorXd::Zero(9), 100000, 1e-12);
  CHECK(fixed_point_residual(p, r, s, sol.x) <= 10 * 1e-12 * std::max(sol.x.norm(), 1.0));
  CHECK(fixed_point_residual(p, r, s, gaussian_vector(9, 5)) > 1e-6);

  const MatrixXd a = gaussian_matrix(5, 9, 72);
  SensingProblem p0(a, VectorXd::Zero(5));
  CHECK(fixed_point_residual(p0, r, default_step_params(p0), VectorXd::Zero(9)) == 0.0);
}

TEST_CASE("admm trivial and desk-scale recovery") {
  const MatrixXd a = gaussian_matrix(10, 20, 81);
  RegParams r{1e-3, 1.0};
  const SolveResult zero = admm_constrained(a, VectorXd::Zero(10), r);
  CHECK(zero.x.norm() <= 1e-10);

  const Signal sig = synth_signal(200, 40, 3, 5);
  const MatrixXd a2 = gaussian_matrix(120, 200, 82);
  const VectorXd y = a2 * sig.values;
  const SolveResult sol = admm_constrained(a2, y, r);
  CHECK(sol.converged);
  CHECK(rel_err(sol.x, sig.values) < 1e-3);
  CHECK((a2 * sol.x - y).norm() / y.norm() < 1e-6);
}

TEST_CASE("admm objective and feasibility settle") {
  const Signal sig = synth_signal(60, 12, 1, 6);
  const MatrixXd a = gaussian_matrix(40, 60, 7);
  const VectorXd y = a * sig.values;
  RegParams r{1e-3, 1.0};
  const SolveResult sol = admm_constrained(a, y, r);
  CHECK(sol.converged);
  const std::size_t k = sol.objective_history.size();
  REQUIRE(k > 10);
  // late objective values are settled relative to the final one
  const double last = sol.objective_history.back();
  for (std::size_t i = k - 5; i < k; ++i)
    CHECK(std::abs(sol.objective_history[i] - last) <= 1e-6 * (1.0 + std::abs(last)));
}
