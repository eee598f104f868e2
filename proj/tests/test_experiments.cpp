#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "l1tv/experiments.hpp"
#include "l1tv/signals.hpp"

using namespace l1tv;
using namespace l1tv::experiments;

namespace {

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line.front() != '#') out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string f;
  while (std::getline(is, f, sep)) out.push_back(f);
  return out;
}

std::string strip_time_columns(const std::string& csv) {
  std::ostringstream os;
  for (const auto& line : data_lines(csv)) {
    auto fields = split(line);
    fields.pop_back();  // time_s is the last column
    for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i];
    os << '\n';
  }
  return os.str();
}

}  // namespace

TEST_CASE("bounds table: deterministic bytes and preset layout") {
  BoundsTableConfig cfg;
  cfg.table1 = true;
  const std::string a = bounds_table_csv(cfg);
  const std::string b = bounds_table_csv(cfg);
  CHECK(a == b);
  const auto rows = data_lines(a);
  REQUIRE(rows.size() == 13);  // header + 6 patterns x 2 ratios
  CHECK(rows[0] ==
        "s_r,s_g,ratio,phi,phi_ceil,phi_l1,phi_l1_sharp,phi_tv,sample_bound");
  // first preset row: s_r=50, s_g=25, ratio=1 with phi ceiling 92
  const auto first = split(rows[1]);
  CHECK(first[0] == "50");
  CHECK(first[1] == "25");
  CHECK(first[4] == "92");
}

TEST_CASE("bounds table: single point grids and validation") {
  BoundsTableConfig cfg;
  cfg.n = 300;
  cfg.s_r_grid = {30};
  cfg.s_g_grid = {15};
  cfg.ratio_grid = {0.5};
  const auto rows = data_lines(bounds_table_csv(cfg));
  REQUIRE(rows.size() == 2);

  cfg.s_g_grid = {299};  // out of range for phi_tv
  CHECK_THROWS(bounds_table_csv(cfg));
}

TEST_CASE("phase transition at the extremes") {
  PhaseConfig cfg;
  cfg.n = 40;
  cfg.s_r = 8;
  cfg.b = 0;
  cfg.trials = 4;
  cfg.ratio_grid = {0.05, 1.0};
  cfg.seed = 3;
  const auto rows = data_lines(phase_csv(cfg));
  REQUIRE(rows.size() == 3);
  const auto low = split(rows[1]);
  const auto high = split(rows[2]);
  CHECK(low[4] == "0");   // success_rate at m = 2
  CHECK(high[4] == "1");  // success_rate at m = n
}

TEST_CASE("ut sweep gaps are nonnegative and corners are ordered") {
  UtSweepConfig cfg;
  cfg.n = 32;
  cfg.m = 16;
  cfg.s_r = 6;
  cfg.b = 0;
  cfg.budget = 400;
  cfg.ref_iters = 60000;
  cfg.u_fracs = {0.2, 0.9};
  cfg.t_fracs = {0.3, 1.0};
  cfg.seed = 5;
  const auto rows = data_lines(ut_sweep_csv(cfg));
  REQUIRE(rows.size() == 5);
  long long small_k = -1, big_k = -1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i]);
    CHECK(std::stod(f[4]) >= -1e-9);
    if (f[0] == "0.2" && f[1] == "0.3") small_k = std::stoll(f[5]);
    if (f[0] == "0.9" && f[1] == "1") big_k = std::stoll(f[5]);
  }
  REQUIRE(big_k >= 0);
  if (small_k >= 0) CHECK(big_k <= small_k);
}

TEST_CASE("train command produces checkpoints and eval reproduces rel_err columns") {
  TrainCmdConfig cfg;
  cfg.n = 24;
  cfg.m = 12;
  cfg.s_r = 5;
  cfg.b = 0;
  cfg.train_count = 40;
  cfg.test_count = 10;
  cfg.depths = {2};
  cfg.epochs = 8;
  cfg.seed = 7;
  cfg.checkpoint_dir = ".";
  const TrainCmdResult tr = train_cmd(cfg);
  REQUIRE(tr.checkpoints.size() == 1);
  const std::string ev1 = eval_cmd(cfg);
  const std::string ev2 = eval_cmd(cfg);
  CHECK(strip_time_columns(ev1) == strip_time_columns(ev2));
  CHECK(strip_time_columns(tr.csv) == strip_time_columns(ev1));
  std::remove(tr.checkpoints[0].c_str());
}

TEST_CASE("verify passes on a healthy build and fails under fault injection") {
  VerifyConfig cfg;
  cfg.kkt_trials = 25;
  cfg.kkt_max_n = 64;
  cfg.grad_instances = 1;
  cfg.grad_depths = {1, 2};
  cfg.seed = 9;
  const Report ok = verify_cmd(cfg);
  CHECK(ok.all_pass);
  CHECK(ok.json.find("\"all_pass\": true") != std::string::npos);

  cfg.inject_grad_fault = true;
  const Report bad = verify_cmd(cfg);
  CHECK_FALSE(bad.all_pass);

  cfg.kkt_trials = 0;
  CHECK_THROWS_AS(verify_cmd(cfg), std::invalid_argument);
}

TEST_CASE("width-mc report stays under the bound") {
  WidthMcConfig cfg;
  cfg.n = 60;
  cfg.trials = 400;
  cfg.families = {{12, 1}, {20, 1}};
  cfg.seed = 13;
  const Report rep = width_mc_cmd(cfg);
  CHECK(rep.all_pass);
  CHECK_THROWS_AS([&] {
    WidthMcConfig badcfg = cfg;
    badcfg.trials = 1;
    width_mc_cmd(badcfg);
  }(), std::invalid_argument);
}

TEST_CASE("gen output round-trips through the signal reader") {
  GenConfig cfg;
  cfg.n = 50;
  cfg.s_r = 12;
  cfg.b = 1;
  cfg.count = 3;
  cfg.seed = 21;
  const std::string csv = gen_csv(cfg);
  CHECK(csv == gen_csv(cfg));
  const auto sigs = signals_from_csv(csv);
  REQUIRE(sigs.size() == 3);
  for (const auto& s : sigs) {
    const auto [sr, sg] = sparsity_levels(s.values, 0.0);
    CHECK(sr == 12);
  }
}

TEST_CASE("solve command recovers a generated signal") {
  GenConfig gcfg;
  gcfg.n = 60;
  gcfg.s_r = 10;
  gcfg.b = 1;
  gcfg.count = 1;
  gcfg.seed = 31;
  const std::string path = "test_solve_tmp.csv";
  {
    std::ofstream f(path);
    f << gen_csv(gcfg);
  }
  SolveConfig cfg;
  cfg.input_csv = path;
  cfg.ratio = 0.7;
  cfg.algo = "admm";
  cfg.seed = 32;
  const Report rep = solve_cmd(cfg);
  CHECK(rep.json.find("\"rel_err\"") != std::string::npos);
  const auto pos = rep.json.find("\"rel_err\": ");
  const double err = std::stod(rep.json.substr(pos + 11));
  CHECK(err < 1e-3);
  std::remove(path.c_str());
}
