#include "l1tv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "l1tv/signals.hpp"

namespace l1tv::experiments {

using json = nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void emit_header(std::ostringstream& os, const std::string& tool, const json& cfg,
                 const std::string& nondet_columns = "") {
  os << "# tool: l1tv " << tool << "\n";
  os << "# config: " << cfg.dump() << "\n";
  if (!nondet_columns.empty()) os << "# nondeterministic-columns: " << nondet_columns << "\n";
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string bounds_table_csv(const BoundsTableConfig& cfg) {
  json jc{{"n", cfg.n},       {"s_r_grid", cfg.s_r_grid}, {"s_g_grid", cfg.s_g_grid},
          {"ratio_grid", cfg.ratio_grid}, {"t", cfg.t},   {"table1", cfg.table1},
          {"seed", cfg.seed}};
  std::ostringstream os;
  emit_header(os, "bounds-table", jc);
  os << "s_r,s_g,ratio,phi,phi_ceil,phi_l1,phi_l1_sharp,phi_tv,sample_bound\n";

  std::vector<std::tuple<Index, Index, double>> rows;
  if (cfg.table1) {
    const std::vector<std::pair<Index, Index>> cells{{50, 25},  {50, 50},   {100, 50},
                                                     {100, 100}, {150, 75}, {150, 150}};
    for (double ratio : {1.0, 0.1})
      for (auto [sr, sg] : cells) rows.emplace_back(sr, sg, ratio);
  } else {
    for (double ratio : cfg.ratio_grid)
      for (Index sr : cfg.s_r_grid)
        for (Index sg : cfg.s_g_grid) rows.emplace_back(sr, sg, ratio);
  }

  const Index n = cfg.table1 ? 1000 : cfg.n;
  for (auto [sr, sg, ratio] : rows) {
    BoundQuery q{n, sr, sg, ratio, 1.0, cfg.t};
    const double v = phi(q);
    os << sr << ',' << sg << ',' << fmt_short(ratio) << ',' << fmt(v) << ','
       << static_cast<long long>(std::ceil(v)) << ',' << fmt(phi_l1(n, sr)) << ','
       << fmt(phi_l1_sharp(n, sr)) << ',' << fmt(phi_tv(n, sg)) << ','
       << sample_bound(v, cfg.t) << '\n';
  }
  return os.str();
}

std::string phase_csv(const PhaseConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("phase: trials must be positive");
  json jc{{"n", cfg.n},     {"s_r", cfg.s_r},   {"b", cfg.b},
          {"ratio_grid", cfg.ratio_grid}, {"trials", cfg.trials},
          {"lam1", cfg.lam1}, {"lam2", cfg.lam2}, {"t", cfg.t},
          {"success_tol", cfg.success_tol}, {"admm_max_iter", cfg.admm_max_iter},
          {"seed", cfg.seed}};
  std::ostringstream os;
  emit_header(os, "phase", jc);

  // Sparsity pattern for the bound overlay, measured on the first signal.
  const Signal probe = synth_signal(cfg.n, cfg.s_r, cfg.b, substream_seed(cfg.seed, 0));
  const auto [sr_meas, sg_meas] = sparsity_levels(probe.values);
  const double phi_val = phi(BoundQuery{cfg.n, sr_meas, sg_meas, cfg.lam1, cfg.lam2, cfg.t});
  const Index bound_m = sample_bound(phi_val, cfg.t);
  os << "# bound: phi=" << fmt(phi_val) << " m=" << bound_m << " (s_r=" << sr_meas
     << ", s_g=" << sg_meas << ", t=" << fmt_short(cfg.t) << ")\n";
  os << "ratio,m,successes,trials,success_rate,bound_m\n";

  AdmmConfig admm;
  admm.max_iter = cfg.admm_max_iter;
  RegParams reg{cfg.lam1, cfg.lam2};
  for (std::size_t ri = 0; ri < cfg.ratio_grid.size(); ++ri) {
    const double ratio = cfg.ratio_grid[ri];
    const Index m = std::max<Index>(1, static_cast<Index>(std::lround(ratio * cfg.n)));
    Index successes = 0;
    for (Index trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t base =
          substream_seed(cfg.seed, (ri + 1) * 1000003ull + static_cast<std::uint64_t>(trial));
      const Signal sig = synth_signal(cfg.n, cfg.s_r, cfg.b, substream_seed(base, 0));
      const MatrixXd a = gaussian_matrix(m, cfg.n, substream_seed(base, 1));
      const VectorXd y = a * sig.values;
      const SolveResult sol = admm_constrained(a, y, reg, admm);
      if (rel_err(sol.x, sig.values) < cfg.success_tol) ++successes;
    }
    os << fmt_short(ratio) << ',' << m << ',' << successes << ',' << cfg.trials << ','
       << fmt(static_cast<double>(successes) / static_cast<double>(cfg.trials)) << ','
       << bound_m << '\n';
  }
  return os.str();
}

std::string ut_sweep_csv(const UtSweepConfig& cfg) {
  json jc{{"n", cfg.n},   {"m", cfg.m},     {"s_r", cfg.s_r},  {"b", cfg.b},
          {"lam1", cfg.lam1}, {"lam2", cfg.lam2}, {"noise_sigma", cfg.noise_sigma},
          {"u_fracs", cfg.u_fracs}, {"t_fracs", cfg.t_fracs}, {"budget", cfg.budget},
          {"gap_threshold", cfg.gap_threshold}, {"ref_iters", cfg.ref_iters},
          {"seed", cfg.seed}};
  std::ostringstream os;
  emit_header(os, "ut-sweep", jc);

  const Signal sig = synth_signal(cfg.n, cfg.s_r, cfg.b, substream_seed(cfg.seed, 0));
  const MatrixXd a = gaussian_matrix(cfg.m, cfg.n, substream_seed(cfg.seed, 1));
  VectorXd y = a * sig.values;
  if (cfg.noise_sigma > 0) y = add_noise(y, cfg.noise_sigma, substream_seed(cfg.seed, 2));
  const SensingProblem p(a, y);
  const RegParams reg{cfg.lam1, cfg.lam2};

  // near-optimal objective from a long run at the default step pair
  const StepParams ref_steps = default_step_params(p);
  const SolveResult ref =
      pgm_ista(p, reg, ref_steps, VectorXd::Zero(cfg.n), cfg.ref_iters, 1e-14);
  double f_star = objective(p, reg, ref.x);
  for (double v : ref.objective_history) f_star = std::min(f_star, v);
  os << "# reference objective: " << fmt(f_star) << "\n";
  os << "u_frac,t_frac,u,t,final_gap,first_iter_below\n";

  const double u_cap = 2.0 / p.spectral_norm_sq;
  for (double uf : cfg.u_fracs) {
    for (double tf : cfg.t_fracs) {
      StepParams s{uf * u_cap, tf * uf * u_cap};
      const SolveResult run = pgm_ista(p, reg, s, VectorXd::Zero(cfg.n), cfg.budget, 0.0);
      const double final_gap = run.objective_history.back() - f_star;
      long long first_k = -1;
      for (std::size_t k = 0; k < run.objective_history.size(); ++k)
        if (run.objective_history[k] - f_star < cfg.gap_threshold) {
          first_k = static_cast<long long>(k);
          break;
        }
      os << fmt_short(uf) << ',' << fmt_short(tf) << ',' << fmt(s.u) << ',' << fmt(s.t)
         << ',' << fmt(final_gap) << ',' << first_k << '\n';
    }
  }
  return os.str();
}

namespace {

Dataset make_dataset(const MatrixXd& a, Index count, Index n, Index s_r, Index b,
                     double sigma, std::uint64_t seed) {
  Dataset d;
  d.x.resize(n, count);
  d.y.resize(a.rows(), count);
  for (Index i = 0; i < count; ++i) {
    const std::uint64_t sub = substream_seed(seed, static_cast<std::uint64_t>(i));
    d.x.col(i) = synth_signal(n, s_r, b, substream_seed(sub, 0)).values;
    VectorXd y = a * d.x.col(i);
    if (sigma > 0) y = add_noise(y, sigma, substream_seed(sub, 1));
    d.y.col(i) = y;
  }
  return d;
}

json train_cfg_json(const TrainCmdConfig& cfg) {
  return json{{"n", cfg.n},       {"m", cfg.m},         {"s_r", cfg.s_r},
              {"b", cfg.b},       {"train_count", cfg.train_count},
              {"test_count", cfg.test_count}, {"lam1", cfg.lam1}, {"lam2", cfg.lam2},
              {"noise_sigma", cfg.noise_sigma}, {"depths", cfg.depths},
              {"epochs", cfg.epochs}, {"batch_size", cfg.batch_size},
              {"learning_rate", cfg.learning_rate}, {"seed", cfg.seed}};
}

struct EvalRow {
  std::string solver;
  Index depth;
  double mean_rel_err;
  double time_s;
};

EvalRow eval_lpgm(const NetParams& theta, const Dataset& test) {
  const auto t0 = std::chrono::steady_clock::now();
  double total = 0;
  for (Index i = 0; i < test.count(); ++i)
    total += rel_err(forward(theta, test.y.col(i)), test.x.col(i));
  return {"lpgm-ista", theta.depth, total / static_cast<double>(test.count()),
          elapsed_s(t0)};
}

EvalRow eval_pgm(const SensingProblem& base, const RegParams& reg, Index iters,
                 const Dataset& test) {
  const StepParams s = default_step_params(base);
  const auto t0 = std::chrono::steady_clock::now();
  double total = 0;
  for (Index i = 0; i < test.count(); ++i) {
    SensingProblem p = base;
    p.y = test.y.col(i);
    const SolveResult run = pgm_ista(p, reg, s, VectorXd::Zero(base.n()), iters, 0.0, false);
    total += rel_err(run.x, test.x.col(i));
  }
  return {"pgm-ista", iters, total / static_cast<double>(test.count()), elapsed_s(t0)};
}

std::string checkpoint_path(const TrainCmdConfig& cfg, Index depth) {
  return cfg.checkpoint_dir + "/lpgm_ista_L" + std::to_string(depth) + ".json";
}

std::string eval_rows_csv(const TrainCmdConfig& cfg, const json& jc,
                          const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  emit_header(os, "eval", jc, "time_s");
  os << "solver,depth,mean_rel_err,time_s\n";
  for (const auto& r : rows)
    os << r.solver << ',' << r.depth << ',' << fmt(r.mean_rel_err) << ','
       << fmt_short(r.time_s) << '\n';
  return os.str();
}

}  // namespace

TrainCmdResult train_cmd(const TrainCmdConfig& cfg) {
  const MatrixXd a = gaussian_matrix(cfg.m, cfg.n, substream_seed(cfg.seed, 101));
  const Dataset train_set = make_dataset(a, cfg.train_count, cfg.n, cfg.s_r, cfg.b,
                                         cfg.noise_sigma, substream_seed(cfg.seed, 102));
  const Dataset test_set = make_dataset(a, cfg.test_count, cfg.n, cfg.s_r, cfg.b,
                                        cfg.noise_sigma, substream_seed(cfg.seed, 103));
  const SensingProblem p(a, VectorXd::Zero(cfg.m));
  const RegParams reg{cfg.lam1, cfg.lam2};

  TrainCmdResult out;
  std::vector<EvalRow> rows;
  for (Index depth : cfg.depths) {
    TrainConfig tc;
    tc.depth = depth;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.seed = substream_seed(cfg.seed, 200 + static_cast<std::uint64_t>(depth));
    const TrainResult tr = train(p, reg, train_set, tc);
    const std::string path = checkpoint_path(cfg, depth);
    save_checkpoint(path, tr.params, tc.seed);
    out.checkpoints.push_back(path);

    const EvalRow lp = eval_lpgm(tr.params, test_set);
    const EvalRow pg = eval_pgm(p, reg, depth, test_set);
    rows.push_back(lp);
    rows.push_back(pg);
    out.rel_errs.emplace_back(lp.mean_rel_err, pg.mean_rel_err);
  }
  out.csv = eval_rows_csv(cfg, train_cfg_json(cfg), rows);
  return out;
}

std::string eval_cmd(const TrainCmdConfig& cfg) {
  const MatrixXd a = gaussian_matrix(cfg.m, cfg.n, substream_seed(cfg.seed, 101));
  const Dataset test_set = make_dataset(a, cfg.test_count, cfg.n, cfg.s_r, cfg.b,
                                        cfg.noise_sigma, substream_seed(cfg.seed, 103));
  const SensingProblem p(a, VectorXd::Zero(cfg.m));
  const RegParams reg{cfg.lam1, cfg.lam2};

  std::vector<EvalRow> rows;
  for (Index depth : cfg.depths) {
    const auto [theta, train_seed] = load_checkpoint(checkpoint_path(cfg, depth));
    (void)train_seed;
    rows.push_back(eval_lpgm(theta, test_set));
    rows.push_back(eval_pgm(p, reg, depth, test_set));
  }
  return eval_rows_csv(cfg, train_cfg_json(cfg), rows);
}

Report verify_cmd(const VerifyConfig& cfg) {
  if (cfg.kkt_trials < 1 || cfg.grad_instances < 1)
    throw std::invalid_argument("verify: trial counts must be positive");

  json checks = json::array();
  bool all_pass = true;

  // TV prox optimality on random inputs of random lengths
  {
    Index failures = 0;
    for (Index trial = 0; trial < cfg.kkt_trials; ++trial) {
      RandomStream rs(substream_seed(cfg.seed, 7000 + static_cast<std::uint64_t>(trial)));
      const Index n = 1 + static_cast<Index>(rs.uniform_index(
                              static_cast<std::uint64_t>(cfg.kkt_max_n)));
      VectorXd x(n);
      for (Index i = 0; i < n; ++i) x[i] = 3.0 * rs.normal();
      const double mu = std::abs(rs.normal());
      const auto res = tv_prox(x, mu);
      if (!tv_prox_kkt_check(x, mu, res.z, cfg.kkt_tol)) ++failures;
    }
    const bool pass = failures == 0;
    all_pass = all_pass && pass;
    checks.push_back({{"name", "tv_prox_kkt"},
                      {"pass", pass},
                      {"trials", cfg.kkt_trials},
                      {"failures", failures},
                      {"tol", cfg.kkt_tol}});
  }

  // analytic vs finite-difference parameter gradients on screened instances
  {
    double worst = 0;
    Index failures = 0;
    for (Index depth : cfg.grad_depths) {
      for (Index i = 0; i < cfg.grad_instances; ++i) {
        const std::uint64_t sub =
            substream_seed(cfg.seed, 8000 + 100 * static_cast<std::uint64_t>(depth) +
                                         static_cast<std::uint64_t>(i));
        const ScreenedInstance inst =
            make_screened_instance(cfg.grad_n, cfg.grad_m, depth, sub, cfg.fd_step);
        std::vector<LayerTape> tape;
        const VectorXd xhat = forward(inst.theta, inst.y, &tape);
        ParamGrads analytic =
            backward(inst.theta, tape, inst.y, 2.0 * (xhat - inst.x_label));
        if (cfg.inject_grad_fault) analytic.u = -analytic.u;
        const ParamGrads fd = param_fd_grads(inst.theta, inst.y, inst.x_label, cfg.fd_step);
        const double err = max_param_rel_err(analytic, fd);
        worst = std::max(worst, err);
        if (!(err < cfg.grad_tol)) ++failures;
      }
    }
    const bool pass = failures == 0;
    all_pass = all_pass && pass;
    checks.push_back({{"name", "grad_check"},
                      {"pass", pass},
                      {"max_rel_err", worst},
                      {"tol", cfg.grad_tol},
                      {"failures", failures}});
  }

  json jc{{"kkt_trials", cfg.kkt_trials}, {"kkt_max_n", cfg.kkt_max_n},
          {"kkt_tol", cfg.kkt_tol},       {"grad_instances", cfg.grad_instances},
          {"grad_n", cfg.grad_n},         {"grad_m", cfg.grad_m},
          {"grad_depths", cfg.grad_depths}, {"grad_tol", cfg.grad_tol},
          {"fd_step", cfg.fd_step},       {"seed", cfg.seed},
          {"inject_grad_fault", cfg.inject_grad_fault}};
  json out{{"tool", "l1tv verify"}, {"config", jc}, {"checks", checks},
           {"all_pass", all_pass}};
  return {all_pass, out.dump(2) + "\n"};
}

Report width_mc_cmd(const WidthMcConfig& cfg) {
  if (cfg.trials < 2) throw std::invalid_argument("width-mc: need trials >= 2");
  if (cfg.families.empty()) throw std::invalid_argument("width-mc: empty family list");

  json rows = json::array();
  bool all_pass = true;
  for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
    const auto [s_r, b] = cfg.families[fi];
    const std::uint64_t sub = substream_seed(cfg.seed, 9000 + fi);
    const Signal sig = synth_signal(cfg.n, s_r, b, substream_seed(sub, 0));
    const auto [sr_meas, sg_meas] = sparsity_levels(sig.values);
    const McWidthResult mc =
        mc_width_upper(sig.values, cfg.lam1, cfg.lam2, cfg.trials, substream_seed(sub, 1));
    const double bound =
        phi(BoundQuery{cfg.n, sr_meas, sg_meas, cfg.lam1, cfg.lam2, 1.0});
    const bool pass = mc.mean <= bound + 3.0 * mc.stderr_;
    all_pass = all_pass && pass;
    rows.push_back({{"s_r", sr_meas},
                    {"s_g", sg_meas},
                    {"blocks", b},
                    {"mc_mean", mc.mean},
                    {"mc_stderr", mc.stderr_},
                    {"phi", bound},
                    {"pass", pass}});
  }
  json jc{{"n", cfg.n},       {"trials", cfg.trials}, {"lam1", cfg.lam1},
          {"lam2", cfg.lam2}, {"seed", cfg.seed}};
  json out{{"tool", "l1tv width-mc"}, {"config", jc}, {"families", rows},
           {"all_pass", all_pass}};
  return {all_pass, out.dump(2) + "\n"};
}

Report solve_cmd(const SolveConfig& cfg) {
  const auto signals = read_csv(cfg.input_csv);
  if (signals.empty()) throw std::runtime_error("solve: input file has no signals");
  if (cfg.column < 0 || cfg.column >= static_cast<Index>(signals.size()))
    throw std::invalid_argument("solve: column out of range");
  const VectorXd x_true = signals[static_cast<std::size_t>(cfg.column)].values;
  const Index n = x_true.size();
  if (n < 2) throw std::invalid_argument("solve: signal too short");

  const Index m = std::max<Index>(1, static_cast<Index>(std::lround(cfg.ratio * n)));
  const MatrixXd a = gaussian_matrix(m, n, substream_seed(cfg.seed, 0));
  VectorXd y = a * x_true;
  if (cfg.noise_sigma > 0) y = add_noise(y, cfg.noise_sigma, substream_seed(cfg.seed, 1));
  const RegParams reg{cfg.lam1, cfg.lam2};

  SolveResult sol;
  if (cfg.algo == "admm") {
    AdmmConfig ac;
    ac.max_iter = cfg.max_iter;
    ac.tol = cfg.tol;
    sol = admm_constrained(a, y, reg, ac);
  } else if (cfg.algo == "pgm") {
    const SensingProblem p(a, y);
    sol = pgm_ista(p, reg, default_step_params(p), VectorXd::Zero(n), cfg.max_iter, cfg.tol);
  } else {
    throw std::invalid_argument("solve: unknown algo '" + cfg.algo + "'");
  }

  if (!cfg.recovered_csv.empty()) {
    Signal rec;
    rec.values = sol.x;
    rec.name = "recovered";
    write_csv(cfg.recovered_csv, {rec});
  }

  json jc{{"input_csv", cfg.input_csv}, {"column", cfg.column}, {"ratio", cfg.ratio},
          {"algo", cfg.algo},           {"lam1", cfg.lam1},     {"lam2", cfg.lam2},
          {"noise_sigma", cfg.noise_sigma}, {"max_iter", cfg.max_iter},
          {"tol", cfg.tol},             {"seed", cfg.seed}};
  json out{{"tool", "l1tv solve"},
           {"config", jc},
           {"m", m},
           {"iterations", sol.iterations},
           {"converged", sol.converged},
           {"rel_err", rel_err(sol.x, x_true)}};
  return {true, out.dump(2) + "\n"};
}

std::string gen_csv(const GenConfig& cfg) {
  if (cfg.count < 1) throw std::invalid_argument("gen: count must be positive");
  std::vector<Signal> sigs;
  for (Index i = 0; i < cfg.count; ++i) {
    Signal s = synth_signal(cfg.n, cfg.s_r, cfg.b,
                            substream_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    s.name = "signal" + std::to_string(i);
    sigs.push_back(std::move(s));
  }
  json jc{{"n", cfg.n}, {"s_r", cfg.s_r}, {"b", cfg.b}, {"count", cfg.count},
          {"seed", cfg.seed}};
  std::ostringstream os;
  emit_header(os, "gen", jc);
  os << signals_to_csv(sigs);
  return os.str();
}

}  // namespace l1tv::experiments
