#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "l1tv/bounds.hpp"
#include "l1tv/solvers.hpp"
#include "l1tv/unrolled.hpp"

// Experiment drivers behind the command-line tool. Every run is fully
// determined by its config (including the seed); outputs start with a header
// block that embeds the resolved config as JSON, and columns that are not
// reproducible (wall times) are declared in the header.
namespace l1tv::experiments {

struct BoundsTableConfig {
  Index n = 1000;
  std::vector<Index> s_r_grid{50};
  std::vector<Index> s_g_grid{25};
  std::vector<double> ratio_grid{1.0};
  double t = 1.0;
  bool table1 = false;  // fixed 6-column, two-ratio comparison layout
  std::uint64_t seed = 1;
};
std::string bounds_table_csv(const BoundsTableConfig& cfg);

struct PhaseConfig {
  Index n = 200;
  Index s_r = 40;
  Index b = 3;
  std::vector<double> ratio_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  Index trials = 20;
  double lam1 = 1e-3;
  double lam2 = 1.0;
  double t = 1.0;
  double success_tol = 1e-3;  // success when rel_err < success_tol
  Index admm_max_iter = 20000;
  std::uint64_t seed = 1;
};
std::string phase_csv(const PhaseConfig& cfg);

struct UtSweepConfig {
  Index n = 64;
  Index m = 32;
  Index s_r = 12;
  Index b = 1;
  double lam1 = 0.01;
  double lam2 = 0.01;
  double noise_sigma = 0.0;
  std::vector<double> u_fracs{0.1, 0.3, 0.5, 0.7, 0.9};  // of 2/||A||_2^2
  std::vector<double> t_fracs{0.1, 0.5, 0.9, 1.0};       // of u
  Index budget = 1000;
  double gap_threshold = 0.01;
  Index ref_iters = 200000;
  std::uint64_t seed = 1;
};
std::string ut_sweep_csv(const UtSweepConfig& cfg);

struct TrainCmdConfig {
  Index n = 64;
  Index m = 32;
  Index s_r = 12;
  Index b = 1;
  Index train_count = 500;
  Index test_count = 100;
  double lam1 = 0.01;
  double lam2 = 0.01;
  double noise_sigma = 0.0;
  std::vector<Index> depths{2, 4, 6};
  Index epochs = 200;
  Index batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  std::string checkpoint_dir = ".";
};
struct TrainCmdResult {
  std::string csv;
  std::vector<std::string> checkpoints;
  // per depth: (lpgm mean test rel_err, pgm-at-same-iterations mean rel_err)
  std::vector<std::pair<double, double>> rel_errs;
};
TrainCmdResult train_cmd(const TrainCmdConfig& cfg);
// Re-evaluates saved checkpoints on the config's (regenerated) test set.
std::string eval_cmd(const TrainCmdConfig& cfg);

struct VerifyConfig {
  Index kkt_trials = 200;
  Index kkt_max_n = 512;
  double kkt_tol = 1e-8;
  Index grad_instances = 5;
  Index grad_n = 12;
  Index grad_m = 8;
  std::vector<Index> grad_depths{1, 2, 4};
  double grad_tol = 1e-5;
  double fd_step = 1e-6;
  std::uint64_t seed = 1;
  bool inject_grad_fault = false;  // test hook: corrupts the analytic u-gradient
};
struct Report {
  bool all_pass = false;
  std::string json;
};
Report verify_cmd(const VerifyConfig& cfg);

struct WidthMcConfig {
  Index n = 100;
  Index trials = 2000;
  // signal families as (s_r, blocks)
  std::vector<std::pair<Index, Index>> families{{20, 1}, {20, 2}, {30, 1}, {30, 3}, {40, 2}};
  double lam1 = 1.0;
  double lam2 = 1.0;
  std::uint64_t seed = 1;
};
Report width_mc_cmd(const WidthMcConfig& cfg);

struct SolveConfig {
  std::string input_csv;
  Index column = 0;
  double ratio = 0.5;  // m = max(1, round(ratio*n))
  std::string algo = "admm";  // "admm" (equality-constrained) or "pgm" (regularized)
  double lam1 = 1e-3;
  double lam2 = 1.0;
  double noise_sigma = 0.0;
  Index max_iter = 20000;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::string recovered_csv;  // optional output of the recovered signal
};
Report solve_cmd(const SolveConfig& cfg);

struct GenConfig {
  Index n = 200;
  Index s_r = 40;
  Index b = 3;
  Index count = 1;
  std::uint64_t seed = 1;
};
std::string gen_csv(const GenConfig& cfg);

}  // namespace l1tv::experiments
