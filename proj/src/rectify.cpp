#include "rstk/rectify.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "rstk/parallel.hpp"

namespace rstk::rectify {

namespace {

std::vector<double> offsets_for(const ShutterParams& shutter, int rows) {
  const double t_m = shutter.mid_offset(rows);
  std::vector<double> off(rows);
  for (int i = 0; i < rows; ++i) off[i] = t_m - i * shutter.t_r;
  return off;
}

RectifyResult splat_rows(const Frame& rs, const warp::DisplacementField& d,
                         std::vector<double> offsets) {
  warp::WarpResult wr = warp::forward_warp(rs, d);
  return {std::move(wr.frame), std::move(wr.mask), std::move(offsets)};
}

}  // namespace

RectifyResult rectify_global(const Frame& rs, const GlobalMotion& motion,
                             const ShutterParams& shutter) {
  require_valid(rs, "rectify_global");
  require_valid(shutter);
  if (!std::isfinite(motion.vx) || !std::isfinite(motion.vy))
    throw std::invalid_argument("rectify_global: motion must be finite");

  auto offsets = offsets_for(shutter, rs.height);
  warp::DisplacementField d(rs.width, rs.height);
  for (int y = 0; y < rs.height; ++y) {
    const float u = static_cast<float>(motion.vx * offsets[y]);
    const float v = static_cast<float>(motion.vy * offsets[y]);
    for (int x = 0; x < rs.width; ++x) {
      d.u(x, y) = u;
      d.v(x, y) = v;
    }
  }
  return splat_rows(rs, d, std::move(offsets));
}

RectifyResult rectify_with_flow(const Frame& rs,
                                const warp::DisplacementField& flow_next,
                                double dt, const ShutterParams& shutter) {
  require_valid(rs, "rectify_with_flow");
  warp::require_valid(flow_next, "rectify_with_flow");
  require_valid(shutter);
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("rectify_with_flow: dt must be positive");
  if (flow_next.width != rs.width || flow_next.height != rs.height)
    throw std::invalid_argument(
        "rectify_with_flow: flow dims must match frame dims");

  auto offsets = offsets_for(shutter, rs.height);
  warp::DisplacementField d(rs.width, rs.height);
  for (int y = 0; y < rs.height; ++y) {
    const double s = offsets[y] / dt;
    for (int x = 0; x < rs.width; ++x) {
      d.u(x, y) = static_cast<float>(s * flow_next.u(x, y));
      d.v(x, y) = static_cast<float>(s * flow_next.v(x, y));
    }
  }
  return splat_rows(rs, d, std::move(offsets));
}

Frame fuse_aligned(const RectifyResult& primary,
                   const warp::WarpResult& warped_prev,
                   const warp::WarpResult& warped_next) {
  const Frame& p = primary.output;
  require_valid(p, "fuse_aligned");
  for (const warp::WarpResult* wr : {&warped_prev, &warped_next}) {
    require_valid(wr->frame, "fuse_aligned");
    require_valid(wr->mask, "fuse_aligned");
    if (!wr->frame.same_shape(p) || wr->mask.width != p.width ||
        wr->mask.height != p.height)
      throw std::invalid_argument("fuse_aligned: sources differ in dimensions");
  }
  if (primary.mask.width != p.width || primary.mask.height != p.height)
    throw std::invalid_argument("fuse_aligned: primary mask dims mismatch");

  const int w = p.width, h = p.height, c = p.channels;
  Frame out(w, h, c);
  std::vector<char> valid(static_cast<std::size_t>(w) * h, 0);

  par::for_chunks(static_cast<std::size_t>(w) * h, [&](std::size_t b,
                                                       std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double w0 = primary.mask.data[i];
      const double w1 = warped_prev.mask.data[i];
      const double w2 = warped_next.mask.data[i];
      const double den = w0 + w1 + w2;
      if (den <= 0.0) continue;
      valid[i] = 1;
      for (int ch = 0; ch < c; ++ch)
        out.data[i * c + ch] = static_cast<float>(
            (w0 * p.data[i * c + ch] + w1 * warped_prev.frame.data[i * c + ch] +
             w2 * warped_next.frame.data[i * c + ch]) /
            den);
    }
  });

  // breadth-first fill from the valid region; fixed seed and neighbor order
  // keeps the result deterministic
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < valid.size(); ++i)
    if (valid[i]) queue.push_back(i);
  if (queue.empty())
    throw std::domain_error("fuse_aligned: no valid pixels to fill from");

  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    const int nx[4] = {x, x - 1, x + 1, x};
    const int ny[4] = {y - 1, y, y, y + 1};
    for (int t = 0; t < 4; ++t) {
      if (nx[t] < 0 || nx[t] >= w || ny[t] < 0 || ny[t] >= h) continue;
      const std::size_t j = static_cast<std::size_t>(ny[t]) * w + nx[t];
      if (valid[j]) continue;
      valid[j] = 1;
      for (int ch = 0; ch < c; ++ch) out.data[j * c + ch] = out.data[i * c + ch];
      queue.push_back(j);
    }
  }
  return out;
}

}  // namespace rstk::rectify
