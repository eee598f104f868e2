// Command-line front end: sample-complexity tables, phase-transition and
// step-size sweeps, training/evaluation of the unrolled solver, and
// self-verification reports. Tabular commands emit CSV, report commands emit
// JSON; every output embeds its resolved config and seed.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "l1tv/experiments.hpp"
#include "l1tv/signals.hpp"

namespace {

using namespace l1tv;
using namespace l1tv::experiments;

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot open output file " + out_path);
  f << text;
}

void add_format_flag(CLI::App* cmd, std::string& format, const std::string& native) {
  cmd->add_option("--format", format, "output format (" + native + ")")
      ->default_val(native)
      ->check(CLI::IsMember({native}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l1tv: recovery of simultaneously sparse and gradient-sparse signals"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file");

  std::string out_path;
  app.add_option("--out", out_path, "write output to this file instead of stdout")
      ->configurable(false);

  int exit_code = 0;
  std::string format;

  // bounds-table
  BoundsTableConfig bt;
  std::vector<long long> bt_sr{50}, bt_sg{25};
  auto* cmd_bt = app.add_subcommand("bounds-table", "sample-complexity bound tables");
  cmd_bt->add_option("--n", bt.n);
  cmd_bt->add_option("--s-r", bt_sr, "sparsity grid");
  cmd_bt->add_option("--s-g", bt_sg, "gradient-sparsity grid");
  cmd_bt->add_option("--ratio", bt.ratio_grid, "lam1/lam2 grid (lam2 fixed to 1)");
  cmd_bt->add_option("--t", bt.t, "tail parameter of the sampling bound");
  cmd_bt->add_flag("--table1", bt.table1, "built-in 6-pattern, two-ratio comparison layout");
  cmd_bt->add_option("--seed", bt.seed);
  add_format_flag(cmd_bt, format, "csv");
  cmd_bt->callback([&] {
    bt.s_r_grid.assign(bt_sr.begin(), bt_sr.end());
    bt.s_g_grid.assign(bt_sg.begin(), bt_sg.end());
    write_output(bounds_table_csv(bt), out_path);
  });

  // phase
  PhaseConfig ph;
  auto* cmd_ph = app.add_subcommand("phase", "exact-recovery phase transition (ADMM)");
  cmd_ph->add_option("--n", ph.n);
  cmd_ph->add_option("--s-r", ph.s_r);
  cmd_ph->add_option("--b", ph.b, "number of length-10 blocks");
  cmd_ph->add_option("--ratio", ph.ratio_grid, "sampling ratios m/n");
  cmd_ph->add_option("--trials", ph.trials);
  cmd_ph->add_option("--lambda1", ph.lam1);
  cmd_ph->add_option("--lambda2", ph.lam2);
  cmd_ph->add_option("--t", ph.t, "tail parameter of the bound overlay");
  cmd_ph->add_option("--success-tol", ph.success_tol);
  cmd_ph->add_option("--admm-max-iter", ph.admm_max_iter);
  cmd_ph->add_option("--seed", ph.seed);
  add_format_flag(cmd_ph, format, "csv");
  cmd_ph->callback([&] { write_output(phase_csv(ph), out_path); });

  // ut-sweep
  UtSweepConfig ut;
  auto* cmd_ut = app.add_subcommand("ut-sweep", "objective gaps over the (u,t) step grid");
  cmd_ut->add_option("--n", ut.n);
  cmd_ut->add_option("--m", ut.m);
  cmd_ut->add_option("--s-r", ut.s_r);
  cmd_ut->add_option("--b", ut.b);
  cmd_ut->add_option("--lambda1", ut.lam1);
  cmd_ut->add_option("--lambda2", ut.lam2);
  cmd_ut->add_option("--sigma", ut.noise_sigma);
  cmd_ut->add_option("--u-frac", ut.u_fracs, "u as fractions of 2/||A||^2");
  cmd_ut->add_option("--t-frac", ut.t_fracs, "t as fractions of u");
  cmd_ut->add_option("--budget", ut.budget, "iteration budget per grid point");
  cmd_ut->add_option("--gap-threshold", ut.gap_threshold);
  cmd_ut->add_option("--ref-iters", ut.ref_iters);
  cmd_ut->add_option("--seed", ut.seed);
  add_format_flag(cmd_ut, format, "csv");
  cmd_ut->callback([&] { write_output(ut_sweep_csv(ut), out_path); });

  // train / eval
  TrainCmdConfig tr;
  std::vector<long long> tr_depths{2, 4, 6};
  auto add_train_opts = [&](CLI::App* cmd) {
    cmd->add_option("--n", tr.n);
    cmd->add_option("--m", tr.m);
    cmd->add_option("--s-r", tr.s_r);
    cmd->add_option("--b", tr.b);
    cmd->add_option("--train-count", tr.train_count);
    cmd->add_option("--test-count", tr.test_count);
    cmd->add_option("--lambda1", tr.lam1);
    cmd->add_option("--lambda2", tr.lam2);
    cmd->add_option("--sigma", tr.noise_sigma);
    cmd->add_option("--depths", tr_depths, "layer counts to train/evaluate");
    cmd->add_option("--epochs", tr.epochs);
    cmd->add_option("--batch-size", tr.batch_size);
    cmd->add_option("--lr", tr.learning_rate);
    cmd->add_option("--seed", tr.seed);
    cmd->add_option("--checkpoint-dir", tr.checkpoint_dir);
  };
  auto* cmd_tr = app.add_subcommand("train", "train unrolled solvers and evaluate them");
  add_train_opts(cmd_tr);
  add_format_flag(cmd_tr, format, "csv");
  cmd_tr->callback([&] {
    tr.depths.assign(tr_depths.begin(), tr_depths.end());
    write_output(train_cmd(tr).csv, out_path);
  });
  auto* cmd_ev = app.add_subcommand("eval", "evaluate saved checkpoints on the test set");
  add_train_opts(cmd_ev);
  add_format_flag(cmd_ev, format, "csv");
  cmd_ev->callback([&] {
    tr.depths.assign(tr_depths.begin(), tr_depths.end());
    write_output(eval_cmd(tr), out_path);
  });

  // verify
  VerifyConfig vf;
  auto* cmd_vf = app.add_subcommand("verify", "prox optimality and gradient self-checks");
  cmd_vf->add_option("--kkt-trials", vf.kkt_trials);
  cmd_vf->add_option("--kkt-max-n", vf.kkt_max_n);
  cmd_vf->add_option("--kkt-tol", vf.kkt_tol);
  cmd_vf->add_option("--grad-instances", vf.grad_instances);
  cmd_vf->add_option("--grad-n", vf.grad_n);
  cmd_vf->add_option("--grad-m", vf.grad_m);
  cmd_vf->add_option("--fd-step", vf.fd_step);
  cmd_vf->add_option("--grad-tol", vf.grad_tol);
  cmd_vf->add_option("--seed", vf.seed);
  cmd_vf->add_flag("--inject-grad-fault", vf.inject_grad_fault,
                   "test hook: corrupt the analytic u-gradient");
  add_format_flag(cmd_vf, format, "json");
  cmd_vf->callback([&] {
    const Report r = verify_cmd(vf);
    write_output(r.json, out_path);
    if (!r.all_pass) exit_code = 1;
  });

  // width-mc
  WidthMcConfig wm;
  auto* cmd_wm = app.add_subcommand("width-mc", "Monte-Carlo width estimate vs closed form");
  cmd_wm->add_option("--n", wm.n);
  cmd_wm->add_option("--trials", wm.trials);
  cmd_wm->add_option("--lambda1", wm.lam1);
  cmd_wm->add_option("--lambda2", wm.lam2);
  cmd_wm->add_option("--seed", wm.seed);
  add_format_flag(cmd_wm, format, "json");
  cmd_wm->callback([&] {
    const Report r = width_mc_cmd(wm);
    write_output(r.json, out_path);
    if (!r.all_pass) exit_code = 1;
  });

  // solve
  SolveConfig sv;
  auto* cmd_sv = app.add_subcommand("solve", "one-shot recovery of a CSV signal");
  cmd_sv->add_option("--input", sv.input_csv, "CSV file, one signal per column")->required();
  cmd_sv->add_option("--column", sv.column);
  cmd_sv->add_option("--sampling-ratio", sv.ratio);
  cmd_sv->add_option("--algo", sv.algo)->check(CLI::IsMember({"admm", "pgm"}));
  cmd_sv->add_option("--lambda1", sv.lam1);
  cmd_sv->add_option("--lambda2", sv.lam2);
  cmd_sv->add_option("--sigma", sv.noise_sigma);
  cmd_sv->add_option("--max-iter", sv.max_iter);
  cmd_sv->add_option("--tol", sv.tol);
  cmd_sv->add_option("--seed", sv.seed);
  cmd_sv->add_option("--recovered", sv.recovered_csv, "write the recovered signal here");
  add_format_flag(cmd_sv, format, "json");
  cmd_sv->callback([&] { write_output(solve_cmd(sv).json, out_path); });

  // gen
  GenConfig gn;
  auto* cmd_gn = app.add_subcommand("gen", "dump synthetic signals as CSV");
  cmd_gn->add_option("--n", gn.n);
  cmd_gn->add_option("--s-r", gn.s_r);
  cmd_gn->add_option("--b", gn.b);
  cmd_gn->add_option("--count", gn.count);
  cmd_gn->add_option("--seed", gn.seed);
  add_format_flag(cmd_gn, format, "csv");
  cmd_gn->callback([&] { write_output(gen_csv(gn), out_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
