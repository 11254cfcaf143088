#pragma once

#include <utility>
#include <vector>

#include "rstk/image.hpp"
#include "rstk/warp.hpp"

namespace rstk::flow {

/// Knobs of the coarse-to-fine descent. Defaults give the reference
/// behavior pinned by the tests.
struct SolverConfig {
  double lambda_c = 10.0;    // data term weight
  double lambda_tv = 0.1;    // smoothness weight
  double eps_charb = 1e-3;   // Charbonnier constant
  int levels = 3;            // pyramid depth
  int max_iters = 200;       // per level
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  int max_backtracks = 20;
  double rel_tol = 1e-6;     // relative objective decrease stop
};

void require_valid(const SolverConfig& cfg);

struct LevelTrace {
  int iters = 0;
  // objective before the first step, then after each accepted step
  std::vector<double> objective;
};

struct SolveReport {
  std::vector<LevelTrace> levels;  // coarsest first
  double final_objective = 0.0;
  double grad_inf_norm = 0.0;
  bool converged = false;
};

/// Smoothed L1: loss = sum over samples of sqrt(r^2 + eps^2), together
/// with its elementwise gradient r / sqrt(r^2 + eps^2).
std::pair<double, Frame> charbonnier_loss(const Frame& residual, double eps);

/// Charbonnier-smoothed anisotropic total variation over the forward
/// differences of both field components, with analytic gradient.
std::pair<double, warp::DisplacementField> tv_loss(
    const warp::DisplacementField& field, double eps);

/// Rec. 601 luma; identity for single-channel input.
Frame to_luma(const Frame& frame);

/// E(D) = lambda_c * charbonnier(backward_warp(a, D, clamp) - b)
///      + lambda_tv * tv(D), with the analytic gradient if requested.
/// This is the solver's inner evaluation, exposed for gradient checks.
double objective(const Frame& a, const Frame& b,
                 const warp::DisplacementField& d, const SolverConfig& cfg,
                 warp::DisplacementField* grad = nullptr);

struct FlowResult {
  warp::DisplacementField field;  // maps a toward b: a(q + D(q)) ~ b(q)
  SolveReport report;
};

/// Coarse-to-fine estimation of the displacement field from a to b by
/// gradient descent with backtracking line search on E(D). RGB inputs are
/// reduced to luma first.
FlowResult solve_flow(const Frame& a, const Frame& b, const SolverConfig& cfg);

}  // namespace rstk::flow
