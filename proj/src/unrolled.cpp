#include "l1tv/unrolled.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "l1tv/signals.hpp"

namespace l1tv {

using json = nlohmann::json;

void ParamGrads::set_zero(Index n, Index m) {
  w_x = MatrixXd::Zero(n, n);
  w_y = MatrixXd::Zero(n, m);
  u = 0;
  t = 0;
}

ParamGrads& ParamGrads::operator+=(const ParamGrads& other) {
  w_x += other.w_x;
  w_y += other.w_y;
  u += other.u;
  t += other.t;
  return *this;
}

ParamGrads& ParamGrads::operator*=(double s) {
  w_x *= s;
  w_y *= s;
  u *= s;
  t *= s;
  return *this;
}

NetParams init_params(const SensingProblem& p, const RegParams& r, Index depth) {
  if (depth < 1) throw std::invalid_argument("init_params: depth must be >= 1");
  r.validate();
  NetParams theta;
  theta.u = 1.0 / p.spectral_norm_sq;
  theta.t = 0.9 * theta.u;
  theta.w_y = theta.u * p.a.transpose();
  theta.w_x = MatrixXd::Identity(p.n(), p.n()) - theta.u * (p.a.transpose() * p.a);
  theta.lam1 = r.lam1;
  theta.lam2 = r.lam2;
  theta.depth = depth;
  return theta;
}

VectorXd forward(const NetParams& theta, const VectorXd& y, std::vector<LayerTape>* tape) {
  if (y.size() != theta.m()) throw std::invalid_argument("forward: y size mismatch");
  if (theta.u <= 0 || theta.t <= 0)
    throw std::invalid_argument("forward: u and t must be positive");
  const Index n = theta.n();
  const double ratio = theta.t / theta.u;
  const double tau = theta.lam1 * theta.u;
  const double mu = theta.lam2 * theta.t;
  if (tape) {
    tape->clear();
    tape->reserve(theta.depth);
  }
  const VectorXd wy_y = theta.w_y * y;
  VectorXd x = VectorXd::Zero(n);
  for (Index layer = 0; layer < theta.depth; ++layer) {
    LayerTape rec;
    rec.v = theta.w_x * x + wy_y;
    rec.s_mask = (tau == 0) ? Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, true)
                            : (rec.v.array().abs() > tau).eval();
    rec.s_out = soft_threshold(rec.v, tau);
    rec.w = (1.0 - ratio) * x + ratio * rec.s_out;
    rec.taut = tv_prox(rec.w, mu);
    if (tape) {
      rec.x_in = x;
      x = rec.taut.z;
      tape->push_back(std::move(rec));
    } else {
      x = rec.taut.z;
    }
  }
  return x;
}

ParamGrads backward(const NetParams& theta, const std::vector<LayerTape>& tape,
                    const VectorXd& y, const VectorXd& grad_out) {
  if (tape.empty()) throw std::invalid_argument("backward: tape is empty");
  if (static_cast<Index>(tape.size()) != theta.depth)
    throw std::invalid_argument("backward: tape depth mismatch");
  const Index n = theta.n();
  const double u = theta.u, t = theta.t;
  const double ratio = t / u;

  ParamGrads grads;
  grads.set_zero(n, theta.m());
  VectorXd g = grad_out;
  for (Index layer = theta.depth - 1; layer >= 0; --layer) {
    const LayerTape& rec = tape[layer];

    // outer TV prox
    VectorXd g_w;
    if (rec.taut.mu == 0) {
      g_w = g;  // identity prox
    } else {
      TvProxVjp<double> vjp = tv_prox_jacobian_vjp(rec.taut, g);
      g_w = std::move(vjp.grad_x);
      grads.t += theta.lam2 * vjp.grad_mu;  // threshold is lam2*t
    }

    // convex combination w = (1 - t/u) x_in + (t/u) s_out
    grads.t += g_w.dot(rec.s_out - rec.x_in) / u;
    grads.u += g_w.dot(rec.x_in - rec.s_out) * (t / (u * u));
    VectorXd g_s = ratio * g_w;

    // soft threshold: active mask, and the threshold lam1*u moves with u
    VectorXd g_v = rec.s_mask.select(g_s, VectorXd::Zero(n));
    if (theta.lam1 * u > 0) {
      const VectorXd masked_sign =
          rec.s_mask.select(rec.v.array().sign().matrix(), VectorXd::Zero(n));
      grads.u -= theta.lam1 * g_s.dot(masked_sign);
    }

    // affine stage
    grads.w_x += g_v * rec.x_in.transpose();
    grads.w_y += g_v * y.transpose();
    g = (1.0 - ratio) * g_w + theta.w_x.transpose() * g_v;
  }
  return grads;
}

double net_loss(const NetParams& theta, const Dataset& batch) {
  if (batch.count() < 1) throw std::invalid_argument("net_loss: empty batch");
  if (batch.y.rows() != theta.m() || batch.x.rows() != theta.n() ||
      batch.y.cols() != batch.x.cols())
    throw std::invalid_argument("net_loss: shape mismatch");
  double total = 0;
  for (Index i = 0; i < batch.count(); ++i)
    total += (forward(theta, batch.y.col(i)) - batch.x.col(i)).squaredNorm();
  return total / static_cast<double>(batch.count());
}

namespace {

// Adam moments for the tied parameter block.
struct AdamState {
  ParamGrads m, v;
  Index step = 0;
};

void adam_update(NetParams& theta, const ParamGrads& g, AdamState& st,
                 const TrainConfig& cfg) {
  ++st.step;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  const double alpha = cfg.learning_rate * std::sqrt(corr2) / corr1;

  auto step_mat = [&](MatrixXd& param, const MatrixXd& grad, MatrixXd& m, MatrixXd& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param -= alpha * (m.array() / (v.array().sqrt() + cfg.adam_eps)).matrix();
  };
  auto step_scalar = [&](double& param, double grad, double& m, double& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad * grad;
    param -= alpha * m / (std::sqrt(v) + cfg.adam_eps);
  };
  step_mat(theta.w_x, g.w_x, st.m.w_x, st.v.w_x);
  step_mat(theta.w_y, g.w_y, st.m.w_y, st.v.w_y);
  step_scalar(theta.u, g.u, st.m.u, st.v.u);
  step_scalar(theta.t, g.t, st.m.t, st.v.t);
  theta.u = std::max(theta.u, cfg.step_floor);
  theta.t = std::max(theta.t, cfg.step_floor);
}

double subset_loss(const NetParams& theta, const Dataset& data,
                   const std::vector<Index>& idx) {
  double total = 0;
  for (Index i : idx) total += (forward(theta, data.y.col(i)) - data.x.col(i)).squaredNorm();
  return total / static_cast<double>(idx.size());
}

}  // namespace

TrainResult train(const SensingProblem& p, const RegParams& r, const Dataset& data,
                  const TrainConfig& cfg) {
  if (data.count() < 2) throw std::invalid_argument("train: need at least two samples");
  if (data.y.rows() != p.m() || data.x.rows() != p.n())
    throw std::invalid_argument("train: dataset shape mismatch");

  NetParams theta = init_params(p, r, cfg.depth);

  std::vector<Index> order(static_cast<std::size_t>(data.count()));
  std::iota(order.begin(), order.end(), Index(0));
  RandomStream split_rs(substream_seed(cfg.seed, 0));
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[split_rs.uniform_index(i)]);
  const Index val_count =
      std::max<Index>(1, static_cast<Index>(std::lround(cfg.val_fraction *
                                                        static_cast<double>(data.count()))));
  std::vector<Index> val_idx(order.begin(), order.begin() + val_count);
  std::vector<Index> train_idx(order.begin() + val_count, order.end());
  if (train_idx.empty()) throw std::invalid_argument("train: empty training split");

  TrainResult res;
  res.params = theta;
  res.best_epoch = 0;
  double best_val = subset_loss(theta, data, val_idx);

  AdamState st;
  st.m.set_zero(theta.n(), theta.m());
  st.v.set_zero(theta.n(), theta.m());

  ParamGrads batch_grads;
  std::vector<LayerTape> tape;
  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    RandomStream epoch_rs(substream_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = train_idx.size(); i > 1; --i)
      std::swap(train_idx[i - 1], train_idx[epoch_rs.uniform_index(i)]);

    double epoch_loss = 0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double bsz = static_cast<double>(stop - start);
      batch_grads.set_zero(theta.n(), theta.m());
      for (std::size_t j = start; j < stop; ++j) {
        const Index i = train_idx[j];
        const VectorXd xhat = forward(theta, data.y.col(i), &tape);
        const VectorXd err = xhat - data.x.col(i);
        epoch_loss += err.squaredNorm();
        batch_grads += backward(theta, tape, data.y.col(i), 2.0 * err);
      }
      batch_grads *= 1.0 / bsz;
      adam_update(theta, batch_grads, st, cfg);
    }
    epoch_loss /= static_cast<double>(train_idx.size());
    const double val = subset_loss(theta, data, val_idx);
    if (!std::isfinite(epoch_loss) || !std::isfinite(val))
      throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                               std::to_string(epoch));
    res.train_loss.push_back(epoch_loss);
    res.val_loss.push_back(val);
    if (val < best_val) {
      best_val = val;
      res.params = theta;
      res.best_epoch = epoch;
    }
  }
  return res;
}

namespace {

bool masks_equal(const std::vector<LayerTape>& a, const std::vector<LayerTape>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if ((a[l].s_mask != b[l].s_mask).any()) return false;
    if (a[l].taut.jump_indices != b[l].taut.jump_indices) return false;
    if (a[l].taut.jump_signs != b[l].taut.jump_signs) return false;
  }
  return true;
}

double pair_loss(const NetParams& theta, const VectorXd& y, const VectorXd& x_label,
                 std::vector<LayerTape>* tape = nullptr) {
  return (forward(theta, y, tape) - x_label).squaredNorm();
}

}  // namespace

ParamGrads param_fd_grads(const NetParams& theta, const VectorXd& y,
                          const VectorXd& x_label, double fd_step) {
  if (fd_step <= 0) throw std::invalid_argument("param_fd_grads: fd_step must be positive");
  std::vector<LayerTape> base_tape, probe_tape;
  pair_loss(theta, y, x_label, &base_tape);

  auto probe = [&](const NetParams& th) {
    const double value = pair_loss(th, y, x_label, &probe_tape);
    if (!masks_equal(base_tape, probe_tape))
      throw MaskUnstableError("param_fd_grads: activation pattern changed under probe");
    return value;
  };

  ParamGrads fd;
  fd.set_zero(theta.n(), theta.m());
  NetParams th = theta;
  for (Index i = 0; i < theta.w_x.rows(); ++i)
    for (Index j = 0; j < theta.w_x.cols(); ++j) {
      const double save = th.w_x(i, j);
      th.w_x(i, j) = save + fd_step;
      const double lp = probe(th);
      th.w_x(i, j) = save - fd_step;
      const double lm = probe(th);
      th.w_x(i, j) = save;
      fd.w_x(i, j) = (lp - lm) / (2.0 * fd_step);
    }
  for (Index i = 0; i < theta.w_y.rows(); ++i)
    for (Index j = 0; j < theta.w_y.cols(); ++j) {
      const double save = th.w_y(i, j);
      th.w_y(i, j) = save + fd_step;
      const double lp = probe(th);
      th.w_y(i, j) = save - fd_step;
      const double lm = probe(th);
      th.w_y(i, j) = save;
      fd.w_y(i, j) = (lp - lm) / (2.0 * fd_step);
    }
  {
    NetParams thu = theta;
    thu.u = theta.u + fd_step;
    const double lp = probe(thu);
    thu.u = theta.u - fd_step;
    const double lm = probe(thu);
    fd.u = (lp - lm) / (2.0 * fd_step);
  }
  {
    NetParams tht = theta;
    tht.t = theta.t + fd_step;
    const double lp = probe(tht);
    tht.t = theta.t - fd_step;
    const double lm = probe(tht);
    fd.t = (lp - lm) / (2.0 * fd_step);
  }
  return fd;
}

double max_param_rel_err(const ParamGrads& analytic, const ParamGrads& fd) {
  double worst = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / (std::abs(b) + 1e-12); };
  for (Index i = 0; i < analytic.w_x.rows(); ++i)
    for (Index j = 0; j < analytic.w_x.cols(); ++j)
      worst = std::max(worst, rel(analytic.w_x(i, j), fd.w_x(i, j)));
  for (Index i = 0; i < analytic.w_y.rows(); ++i)
    for (Index j = 0; j < analytic.w_y.cols(); ++j)
      worst = std::max(worst, rel(analytic.w_y(i, j), fd.w_y(i, j)));
  worst = std::max(worst, rel(analytic.u, fd.u));
  worst = std::max(worst, rel(analytic.t, fd.t));
  return worst;
}

double grad_check(const NetParams& theta, const VectorXd& y, const VectorXd& x_label,
                  double fd_step) {
  std::vector<LayerTape> tape;
  const VectorXd xhat = forward(theta, y, &tape);
  const ParamGrads analytic = backward(theta, tape, y, 2.0 * (xhat - x_label));
  const ParamGrads fd = param_fd_grads(theta, y, x_label, fd_step);
  return max_param_rel_err(analytic, fd);
}

ScreenedInstance make_screened_instance(Index n, Index m, Index depth,
                                        std::uint64_t seed, double fd_step,
                                        int max_retries) {
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const std::uint64_t sub = substream_seed(seed, static_cast<std::uint64_t>(attempt));
    const MatrixXd a = gaussian_matrix(m, n, sub);
    const Index s_r = std::max<Index>(2, n / 3);
    Signal sig = synth_signal(n, s_r, 0, substream_seed(sub, 1));
    const VectorXd y = a * sig.values;
    SensingProblem p(a, y);
    RegParams r{0.05, 0.05};
    NetParams theta = init_params(p, r, depth);

    // nudge the weights off the exact algorithmic initialization
    RandomStream rs(substream_seed(sub, 2));
    for (Index i = 0; i < theta.w_x.rows(); ++i)
      for (Index j = 0; j < theta.w_x.cols(); ++j) theta.w_x(i, j) += 0.01 * rs.normal();
    for (Index i = 0; i < theta.w_y.rows(); ++i)
      for (Index j = 0; j < theta.w_y.cols(); ++j) theta.w_y(i, j) += 0.01 * rs.normal();
    theta.u *= 1.0 + 0.1 * rs.uniform();
    theta.t *= 1.0 + 0.1 * rs.uniform();

    try {
      param_fd_grads(theta, y, sig.values, fd_step);
    } catch (const MaskUnstableError&) {
      continue;
    }
    return ScreenedInstance{std::move(theta), y, sig.values};
  }
  throw std::runtime_error("make_screened_instance: no mask-stable point found");
}

void save_checkpoint(const std::string& path, const NetParams& theta,
                     std::uint64_t train_seed) {
  json j;
  j["format"] = "lpgm-ista-checkpoint";
  j["version"] = 1;
  j["n"] = theta.n();
  j["m"] = theta.m();
  j["depth"] = theta.depth;
  j["u"] = theta.u;
  j["t"] = theta.t;
  j["lambda1"] = theta.lam1;
  j["lambda2"] = theta.lam2;
  j["train_seed"] = train_seed;
  std::vector<double> wx(theta.w_x.size()), wy(theta.w_y.size());
  for (Index i = 0; i < theta.w_x.rows(); ++i)
    for (Index jx = 0; jx < theta.w_x.cols(); ++jx)
      wx[static_cast<std::size_t>(i * theta.w_x.cols() + jx)] = theta.w_x(i, jx);
  for (Index i = 0; i < theta.w_y.rows(); ++i)
    for (Index jx = 0; jx < theta.w_y.cols(); ++jx)
      wy[static_cast<std::size_t>(i * theta.w_y.cols() + jx)] = theta.w_y(i, jx);
  j["w_x"] = wx;
  j["w_y"] = wy;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f << j.dump();
}

std::pair<NetParams, std::uint64_t> load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json j;
  f >> j;
  if (j.value("format", "") != "lpgm-ista-checkpoint")
    throw std::runtime_error("load_checkpoint: unrecognized format");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("load_checkpoint: unsupported version");
  NetParams theta;
  const Index n = j.at("n").get<Index>();
  const Index m = j.at("m").get<Index>();
  theta.depth = j.at("depth").get<Index>();
  theta.u = j.at("u").get<double>();
  theta.t = j.at("t").get<double>();
  theta.lam1 = j.at("lambda1").get<double>();
  theta.lam2 = j.at("lambda2").get<double>();
  const auto wx = j.at("w_x").get<std::vector<double>>();
  const auto wy = j.at("w_y").get<std::vector<double>>();
  if (wx.size() != static_cast<std::size_t>(n * n) ||
      wy.size() != static_cast<std::size_t>(n * m))
    throw std::runtime_error("load_checkpoint: weight size mismatch");
  theta.w_x.resize(n, n);
  theta.w_y.resize(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index jx = 0; jx < n; ++jx)
      theta.w_x(i, jx) = wx[static_cast<std::size_t>(i * n + jx)];
  for (Index i = 0; i < n; ++i)
    for (Index jx = 0; jx < m; ++jx)
      theta.w_y(i, jx) = wy[static_cast<std::size_t>(i * m + jx)];
  return {std::move(theta), j.at("train_seed").get<std::uint64_t>()};
}

}  // namespace l1tv
