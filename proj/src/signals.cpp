#include "l1tv/signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace l1tv {

namespace {

constexpr Index kBlockLen = 10;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Signal synth_signal(Index n, Index s_r, Index b, std::uint64_t seed) {
  if (b < 0 || s_r < 0) throw std::invalid_argument("synth_signal: negative counts");
  if (kBlockLen * b > s_r || s_r > n)
    throw std::invalid_argument("synth_signal: need 10b <= s_r <= n");

  const Index spikes = s_r - kBlockLen * b;
  RandomStream rs(seed);
  constexpr int kMaxAttempts = 10000;

  // occupied[i]: cell carries a nonzero; blocked[i]: cell must stay zero so a
  // block's jumps are not absorbed by a touching neighbor.
  std::vector<char> occupied(static_cast<std::size_t>(n), 0);
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  VectorXd x = VectorXd::Zero(n);

  for (Index blk = 0; blk < b; ++blk) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Index start =
          static_cast<Index>(rs.uniform_index(static_cast<std::uint64_t>(n - kBlockLen + 1)));
      bool free = true;
      for (Index i = start; i < start + kBlockLen; ++i)
        if (occupied[i] || blocked[i]) {
          free = false;
          break;
        }
      if (!free) continue;
      const double amp = rs.normal();
      for (Index i = start; i < start + kBlockLen; ++i) {
        occupied[i] = 1;
        x[i] = amp;
      }
      if (start > 0) blocked[start - 1] = 1;
      if (start + kBlockLen < n) blocked[start + kBlockLen] = 1;
      placed = true;
    }
    if (!placed) throw std::runtime_error("synth_signal: could not place blocks");
  }

  for (Index sp = 0; sp < spikes; ++sp) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Index pos = static_cast<Index>(rs.uniform_index(static_cast<std::uint64_t>(n)));
      if (occupied[pos] || blocked[pos]) continue;
      occupied[pos] = 1;
      double amp;
      do {
        amp = rs.normal();
      } while (amp == 0.0);
      x[pos] = amp;
      placed = true;
    }
    if (!placed) throw std::runtime_error("synth_signal: could not place spikes");
  }

  const double peak = x.cwiseAbs().maxCoeff();
  if (peak > 0) x /= peak;

  Signal sig;
  sig.values = std::move(x);
  sig.seed = seed;
  sig.s_r_target = s_r;
  sig.block_count = b;
  return sig;
}

std::pair<Index, Index> sparsity_levels(const VectorXd& x, double tol) {
  if (tol < 0) throw std::invalid_argument("sparsity_levels: tol must be nonnegative");
  Index s_r = 0, s_g = 0;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > tol) ++s_r;
  for (Index i = 0; i + 1 < x.size(); ++i)
    if (std::abs(x[i + 1] - x[i]) > tol) ++s_g;
  return {s_r, s_g};
}

double rel_err(const VectorXd& xhat, const VectorXd& xref) {
  if (xhat.size() != xref.size()) throw std::invalid_argument("rel_err: size mismatch");
  const double denom = xref.norm();
  if (denom == 0) throw std::invalid_argument("rel_err: zero reference");
  return (xhat - xref).norm() / denom;
}

VectorXd add_noise(const VectorXd& y, double sigma, std::uint64_t seed) {
  if (sigma < 0) throw std::invalid_argument("add_noise: sigma must be nonnegative");
  if (sigma == 0) return y;
  RandomStream rs(seed);
  VectorXd out = y;
  for (Index i = 0; i < out.size(); ++i) out[i] += sigma * rs.normal();
  return out;
}

std::string signals_to_csv(const std::vector<Signal>& signals) {
  std::ostringstream os;
  if (signals.empty()) return os.str();
  const Index len = signals.front().values.size();
  for (std::size_t c = 0; c < signals.size(); ++c) {
    if (signals[c].values.size() != len)
      throw std::invalid_argument("signals_to_csv: signals must share one length");
    if (c) os << ',';
    os << (signals[c].name.empty() ? "signal" + std::to_string(c) : signals[c].name);
  }
  os << '\n';
  for (Index i = 0; i < len; ++i) {
    for (std::size_t c = 0; c < signals.size(); ++c) {
      if (c) os << ',';
      os << format_double(signals[c].values[i]);
    }
    os << '\n';
  }
  return os.str();
}

void write_csv(const std::string& path, const std::vector<Signal>& signals) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  f << signals_to_csv(signals);
}

std::vector<Signal> signals_from_csv(const std::string& text) {
  std::vector<Signal> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  std::vector<std::vector<double>> columns;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;  // config header block
    if (line.empty() && is.peek() == EOF) break;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.empty() || line.back() == ',') fields.push_back("");
    if (!have_header) {
      have_header = true;
      for (auto& name : fields) {
        Signal s;
        s.name = name;
        out.push_back(std::move(s));
      }
      columns.resize(fields.size());
      continue;
    }
    if (fields.size() != out.size())
      throw std::runtime_error("read_csv: ragged row at line " + std::to_string(lineno));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      try {
        std::size_t consumed = 0;
        const double v = std::stod(fields[c], &consumed);
        if (consumed != fields[c].size())
          throw std::invalid_argument("trailing characters");
        columns[c].push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("read_csv: bad value at line " + std::to_string(lineno));
      }
    }
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c].values = Eigen::Map<const VectorXd>(columns[c].data(),
                                               static_cast<Index>(columns[c].size()));
  }
  return out;
}

std::vector<Signal> read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_csv: cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return signals_from_csv(buf.str());
}

}  // namespace l1tv
