#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "l1tv/core.hpp"
#include "l1tv/prox.hpp"
#include "l1tv/solvers.hpp"

namespace l1tv {

// Tied parameters of the unrolled solver. One (W_x, W_y, u, t) quadruple is
// shared by all depth layers; the penalties lam1, lam2 stay fixed and are not
// trained.
struct NetParams {
  MatrixXd w_x;  // n x n
  MatrixXd w_y;  // n x m
  double u = 0;
  double t = 0;
  double lam1 = 0;
  double lam2 = 0;
  Index depth = 0;

  Index n() const { return w_x.rows(); }
  Index m() const { return w_y.cols(); }
};

// Per-layer records kept by the forward pass for the reverse sweep: the layer
// input, the pre-threshold activation with its active mask, the shrunk
// vector, the prox input and the prox result (whose jump masks and signs are
// all the Jacobian information needed). No dense Jacobians are stored.
struct LayerTape {
  VectorXd x_in;
  VectorXd v;       // W_x x_in + W_y y
  Eigen::Array<bool, Eigen::Dynamic, 1> s_mask;  // |v_i| > lam1*u
  VectorXd s_out;   // soft_threshold(v, lam1*u)
  VectorXd w;       // (1 - t/u) x_in + (t/u) s_out
  TautStringResult<double> taut;  // tv_prox(w, lam2*t)
};

struct ParamGrads {
  MatrixXd w_x;
  MatrixXd w_y;
  double u = 0;
  double t = 0;

  void set_zero(Index n, Index m);
  ParamGrads& operator+=(const ParamGrads& other);
  ParamGrads& operator*=(double s);
};

// W_y = u*A^T, W_x = I - u*A^T A with u = 1/||A||_2^2 and t = 0.9u; with
// these weights the forward pass reproduces the iterative solver exactly.
NetParams init_params(const SensingProblem& p, const RegParams& r, Index depth);

// Applies the layer
//   x+ = T_{lam2*t}((1 - t/u) x + (t/u) S_{lam1*u}(W_x x + W_y y))
// depth times from x = 0. Tape recording is optional.
VectorXd forward(const NetParams& theta, const VectorXd& y,
                 std::vector<LayerTape>* tape = nullptr);

// Reverse-mode sweep through the recorded tape. Per layer: the TV prox routes
// the incoming gradient through per-segment averaging and contributes
// lam2 * <J_mu, g> to t's gradient; the convex combination routes to the
// layer input, the shrunk branch and (u, t) through its coefficients; the
// soft threshold applies its active mask and contributes
// -lam1 * <g_s, sign(v) on the mask> to u's gradient; the affine stage
// accumulates the outer-product weight gradients. Tied weights sum over
// layers.
ParamGrads backward(const NetParams& theta, const std::vector<LayerTape>& tape,
                    const VectorXd& y, const VectorXd& grad_out);

// Paired training data stored column-wise: Y is m x N, X is n x N.
struct Dataset {
  MatrixXd y;
  MatrixXd x;

  Index count() const { return y.cols(); }
};

// Mean of ||x_i - net(y_i)||^2 over the batch.
double net_loss(const NetParams& theta, const Dataset& batch);

struct TrainConfig {
  Index depth = 2;
  Index epochs = 200;
  Index batch_size = 32;
  double learning_rate = 1e-3;
  double val_fraction = 0.1;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double step_floor = 1e-8;  // u, t are projected to stay >= this
};

struct TrainResult {
  NetParams params;  // best-validation parameters
  std::vector<double> train_loss;  // one entry per epoch
  std::vector<double> val_loss;
  Index best_epoch = 0;  // 0 = initialization
};

// Mini-batch Adam from init_params. The train/validation split and all batch
// orders derive from cfg.seed, so identical configs give identical histories.
// Throws if the loss turns non-finite.
TrainResult train(const SensingProblem& p, const RegParams& r, const Dataset& data,
                  const TrainConfig& cfg);

// Thrown when a finite-difference probe point changes an activation mask or a
// jump pattern, i.e. the loss is not differentiable there.
struct MaskUnstableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Central finite differences of the single-pair loss ||net(y) - x_label||^2
// with respect to every parameter. Throws MaskUnstableError if any probe
// evaluation changes a mask relative to the base point.
ParamGrads param_fd_grads(const NetParams& theta, const VectorXd& y,
                          const VectorXd& x_label, double fd_step);

double max_param_rel_err(const ParamGrads& analytic, const ParamGrads& fd);

// max over all parameters of |analytic - fd| / (|fd| + 1e-12).
double grad_check(const NetParams& theta, const VectorXd& y, const VectorXd& x_label,
                  double fd_step = 1e-6);

struct ScreenedInstance {
  NetParams theta;
  VectorXd y;
  VectorXd x_label;
};

// Random instance whose masks are stable under +-fd_step probes, found by
// bounded resampling; throws if none of max_retries candidates is stable.
ScreenedInstance make_screened_instance(Index n, Index m, Index depth,
                                        std::uint64_t seed, double fd_step = 1e-6,
                                        int max_retries = 32);

// Versioned JSON checkpoint holding shapes, weights (row-major), step and
// penalty parameters, depth and the training seed.
void save_checkpoint(const std::string& path, const NetParams& theta,
                     std::uint64_t train_seed);
std::pair<NetParams, std::uint64_t> load_checkpoint(const std::string& path);

}  // namespace l1tv
