#include "rstk/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rstk/parallel.hpp"

namespace rstk::flow {

namespace {

double charb(double r, double eps) { return std::sqrt(r * r + eps * eps); }
double charb_grad(double r, double eps) {
  return r / std::sqrt(r * r + eps * eps);
}

// trial = base - step * grad, elementwise
warp::DisplacementField step_field(const warp::DisplacementField& base,
                                   const warp::DisplacementField& grad,
                                   double step) {
  warp::DisplacementField out = base;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = static_cast<float>(base.data[i] - step * grad.data[i]);
  return out;
}

}  // namespace

void require_valid(const SolverConfig& cfg) {
  if (cfg.lambda_c < 0.0 || cfg.lambda_tv < 0.0)
    throw std::invalid_argument("SolverConfig: weights must be >= 0");
  if (!(cfg.eps_charb > 0.0))
    throw std::invalid_argument("SolverConfig: eps_charb must be > 0");
  if (cfg.levels < 1)
    throw std::invalid_argument("SolverConfig: levels must be >= 1");
  if (cfg.max_iters < 1)
    throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (!(cfg.initial_step > 0.0))
    throw std::invalid_argument("SolverConfig: initial_step must be > 0");
  if (!(cfg.backtrack_factor > 0.0) || cfg.backtrack_factor >= 1.0)
    throw std::invalid_argument(
        "SolverConfig: backtrack_factor must lie in (0, 1)");
  if (cfg.max_backtracks < 0)
    throw std::invalid_argument("SolverConfig: max_backtracks must be >= 0");
  if (cfg.rel_tol < 0.0)
    throw std::invalid_argument("SolverConfig: rel_tol must be >= 0");
}

std::pair<double, Frame> charbonnier_loss(const Frame& residual, double eps) {
  require_valid(residual, "charbonnier_loss");
  if (!(eps > 0.0))
    throw std::invalid_argument("charbonnier_loss: eps must be > 0");

  Frame grad(residual.width, residual.height, residual.channels);
  const double loss = par::sum_chunks(
      residual.data.size(), [&](std::size_t b, std::size_t e) {
        double acc = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          const double r = residual.data[i];
          acc += charb(r, eps);
          grad.data[i] = static_cast<float>(charb_grad(r, eps));
        }
        return acc;
      });
  return {loss, std::move(grad)};
}

std::pair<double, warp::DisplacementField> tv_loss(
    const warp::DisplacementField& field, double eps) {
  warp::require_valid(field, "tv_loss");
  if (!(eps > 0.0)) throw std::invalid_argument("tv_loss: eps must be > 0");

  const int w = field.width, h = field.height;
  const auto dh = [&](int x, int y, int comp) {
    // forward difference along x of component comp
    const float* p = field.data.data() +
                     2 * (static_cast<std::size_t>(y) * w + x) + comp;
    return static_cast<double>(p[2]) - static_cast<double>(p[0]);
  };
  const auto dv = [&](int x, int y, int comp) {
    const float* p = field.data.data() +
                     2 * (static_cast<std::size_t>(y) * w + x) + comp;
    return static_cast<double>(p[2 * w]) - static_cast<double>(p[0]);
  };

  const double loss =
      par::sum_chunks(static_cast<std::size_t>(h), [&](std::size_t b,
                                                       std::size_t e) {
        double acc = 0.0;
        for (std::size_t y = b; y < e; ++y)
          for (int x = 0; x < w; ++x)
            for (int comp = 0; comp < 2; ++comp) {
              if (x + 1 < w) acc += charb(dh(x, static_cast<int>(y), comp), eps);
              if (static_cast<int>(y) + 1 < h)
                acc += charb(dv(x, static_cast<int>(y), comp), eps);
            }
        return acc;
      });

  // gradient as a gather: each pixel collects the terms it participates in
  warp::DisplacementField grad(w, h);
  par::for_chunks(static_cast<std::size_t>(h), [&](std::size_t b,
                                                   std::size_t e) {
    for (std::size_t yy = b; yy < e; ++yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < w; ++x)
        for (int comp = 0; comp < 2; ++comp) {
          double g = 0.0;
          if (x + 1 < w) g -= charb_grad(dh(x, y, comp), eps);
          if (x > 0) g += charb_grad(dh(x - 1, y, comp), eps);
          if (y + 1 < h) g -= charb_grad(dv(x, y, comp), eps);
          if (y > 0) g += charb_grad(dv(x, y - 1, comp), eps);
          grad.data[2 * (static_cast<std::size_t>(y) * w + x) + comp] =
              static_cast<float>(g);
        }
    }
  });
  return {loss, std::move(grad)};
}

Frame to_luma(const Frame& frame) {
  require_valid(frame, "to_luma");
  if (frame.channels == 1) return frame;
  if (frame.channels != 3)
    throw std::invalid_argument("to_luma: needs 1 or 3 channels");
  Frame out(frame.width, frame.height, 1);
  par::for_chunks(
      static_cast<std::size_t>(frame.width) * frame.height,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const double r = frame.data[3 * i];
          const double g = frame.data[3 * i + 1];
          const double bl = frame.data[3 * i + 2];
          out.data[i] =
              static_cast<float>(0.299 * r + 0.587 * g + 0.114 * bl);
        }
      });
  return out;
}

double objective(const Frame& a, const Frame& b,
                 const warp::DisplacementField& d, const SolverConfig& cfg,
                 warp::DisplacementField* grad) {
  if (!a.same_shape(b))
    throw std::invalid_argument("objective: frames must match in dimensions");

  const warp::WarpResult warped = warp::backward_warp(a, d, warp::OobMode::clamp);
  Frame residual(a.width, a.height, a.channels);
  for (std::size_t i = 0; i < residual.data.size(); ++i)
    residual.data[i] = warped.frame.data[i] - b.data[i];

  auto [data_loss, data_grad] = charbonnier_loss(residual, cfg.eps_charb);
  auto [smooth_loss, smooth_grad] = tv_loss(d, cfg.eps_charb);

  if (grad) {
    const warp::BackwardWarpGrad wg =
        warp::backward_warp_grad(a, d, data_grad, warp::OobMode::clamp);
    *grad = warp::DisplacementField(d.width, d.height);
    for (std::size_t i = 0; i < grad->data.size(); ++i)
      grad->data[i] =
          static_cast<float>(cfg.lambda_c * wg.d_field.data[i] +
                             cfg.lambda_tv * smooth_grad.data[i]);
  }
  return cfg.lambda_c * data_loss + cfg.lambda_tv * smooth_loss;
}

FlowResult solve_flow(const Frame& a, const Frame& b,
                      const SolverConfig& cfg) {
  require_valid(cfg);
  require_valid(a, "solve_flow");
  require_valid(b, "solve_flow");
  if (!a.same_shape(b))
    throw std::invalid_argument("solve_flow: frames must match in dimensions");

  const Frame ga = to_luma(a);
  const Frame gb = to_luma(b);
  const warp::Pyramid pa = warp::build_pyramid(ga, cfg.levels);
  const warp::Pyramid pb = warp::build_pyramid(gb, cfg.levels);

  FlowResult result;
  result.report.converged = true;
  warp::DisplacementField d;

  for (int level = cfg.levels - 1; level >= 0; --level) {
    const Frame& la = pa.levels[level];
    const Frame& lb = pb.levels[level];
    if (level == cfg.levels - 1)
      d = warp::DisplacementField(la.width, la.height);
    else
      d = warp::upsample_field(d, la.width, la.height);

    LevelTrace trace;
    warp::DisplacementField grad;
    double cur = objective(la, lb, d, cfg, &grad);
    trace.objective.push_back(cur);

    double step = cfg.initial_step;
    bool hit_cap = true;
    for (int it = 0; it < cfg.max_iters; ++it) {
      bool accepted = false;
      for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
        const warp::DisplacementField trial = step_field(d, grad, step);
        const double trial_obj = objective(la, lb, trial, cfg, nullptr);
        if (trial_obj < cur) {
          d = trial;
          cur = trial_obj;
          accepted = true;
          break;
        }
        step *= cfg.backtrack_factor;
      }
      if (!accepted) {
        // no descent within the backtracking budget: stationary enough
        hit_cap = false;
        break;
      }
      trace.objective.push_back(cur);
      ++trace.iters;
      const double prev = trace.objective[trace.objective.size() - 2];
      if (prev - cur <= cfg.rel_tol * std::max(prev, 1e-30)) {
        hit_cap = false;
        break;
      }
      cur = objective(la, lb, d, cfg, &grad);
      step *= 2.0;  // warm start the next line search
    }
    if (hit_cap) result.report.converged = false;
    result.report.levels.push_back(std::move(trace));
    result.report.final_objective = cur;
  }

  warp::DisplacementField grad;
  result.report.final_objective =
      objective(pa.levels[0], pb.levels[0], d, cfg, &grad);
  double inf = 0.0;
  for (float g : grad.data) inf = std::max(inf, std::abs(static_cast<double>(g)));
  result.report.grad_inf_norm = inf;
  result.field = std::move(d);
  return result;
}

}  // namespace rstk::flow
