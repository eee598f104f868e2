#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "l1tv/core.hpp"

namespace l1tv {

struct Signal {
  VectorXd values;
  std::string name;
  std::uint64_t seed = 0;
  Index s_r_target = 0;
  Index block_count = 0;
};

// Piecewise-constant-plus-spikes test signal: b disjoint constant blocks of
// length 10 (one normal amplitude per block) and s_r - 10b isolated spikes
// with normal amplitudes, all placed without touching so each block keeps its
// own jumps; finally scaled by 1/max|x| so the peak magnitude is exactly 1.
// Requires 10b <= s_r <= n and enough room to place everything; placement is
// by bounded rejection sampling and throws if it cannot fit.
Signal synth_signal(Index n, Index s_r, Index b, std::uint64_t seed);

// Counts of entries with |x_i| > tol and differences with |x_{i+1}-x_i| > tol.
std::pair<Index, Index> sparsity_levels(const VectorXd& x, double tol = 1e-12);

// ||xhat - xref||_2 / ||xref||_2; xref must be nonzero.
double rel_err(const VectorXd& xhat, const VectorXd& xref);

// y + sigma*g with seeded standard normal g.
VectorXd add_noise(const VectorXd& y, double sigma, std::uint64_t seed);

// CSV with one signal per column: header row of names, then rows of values
// printed with 17 significant digits (doubles round-trip exactly). All
// signals must share one length.
void write_csv(const std::string& path, const std::vector<Signal>& signals);
std::string signals_to_csv(const std::vector<Signal>& signals);
std::vector<Signal> read_csv(const std::string& path);
std::vector<Signal> signals_from_csv(const std::string& text);

}  // namespace l1tv
