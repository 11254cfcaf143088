#pragma once

#include <vector>

#include "rstk/image.hpp"
#include "rstk/warp.hpp"

namespace rstk::rectify {

/// Constant scene/camera velocity in pixels per second over the local
/// time window.
struct GlobalMotion {
  double vx = 0.0;
  double vy = 0.0;
};

struct RectifyResult {
  Frame output;
  ValidityMask mask;
  std::vector<double> row_offsets;  // seconds; entry i is t_m - i * t_r
};

/// Undoes rolling-shutter row timing for a known constant velocity: row i
/// is forward-splatted by v * (t_m - i * t_r), moving every row to the
/// mid-row exposure time. The middle row never moves.
RectifyResult rectify_global(const Frame& rs, const GlobalMotion& motion,
                             const ShutterParams& shutter);

/// Same inversion driven by an estimated inter-frame displacement field
/// (this frame to the next, spanning dt seconds): the displacement applied
/// at row i is flow * (t_m - i * t_r) / dt.
RectifyResult rectify_with_flow(const Frame& rs,
                                const warp::DisplacementField& flow_next,
                                double dt, const ShutterParams& shutter);

/// Mask-weighted average of the rectified frame with two warped neighbor
/// frames; pixels left with zero total weight are filled from the nearest
/// valid pixel (4-neighborhood breadth-first).
Frame fuse_aligned(const RectifyResult& primary,
                   const warp::WarpResult& warped_prev,
                   const warp::WarpResult& warped_next);

}  // namespace rstk::rectify
