#pragma once

#include "rstk/image.hpp"

namespace rstk::formation {

/// How the continuous scene signal is reconstructed between the discrete
/// frames of a FrameSequence.
struct SynthesisMode {
  enum class Kind { interpolate, rowcopy };
  Kind kind = Kind::interpolate;
  // Temporal samples per exposure window, endpoints included. Ignored by
  // rowcopy; must be >= 2 whenever an exposure window has nonzero width.
  int samples_per_window = 16;
};

SynthesisMode interpolate_mode(int samples_per_window = 16);
SynthesisMode rowcopy_mode();

/// Evaluates the virtual global-shutter image at time tau. interpolate
/// blends the two bracketing frames linearly; rowcopy returns the
/// nearest-timestamp frame, ties toward the earlier one. tau must lie
/// within [t0, t0 + (N-1)*dt].
Frame sample_gs(const FrameSequence& seq, double tau, const SynthesisMode& mode);

/// Rolling-shutter capture centered at t: row i is row i of the scene at
/// t - t_m + i * t_r, with t_m = (M/2) * t_r. shutter.t_e is ignored.
Frame simulate_rs(const FrameSequence& seq, double t,
                  const ShutterParams& shutter, const SynthesisMode& mode);

/// Global-shutter capture with exposure: the mean of the scene over
/// [t - t_e/2, t + t_e/2], approximated by mode.samples_per_window
/// uniformly spaced evaluations including both endpoints. t_e = 0 returns
/// sample_gs(seq, t).
Frame simulate_gs_blur(const FrameSequence& seq, double t,
                       const ShutterParams& shutter,
                       const SynthesisMode& mode);

/// Combined rolling-shutter + exposure capture: row i is the mean of the
/// scene's row i over the window of width t_e centered at the row time
/// t - t_m + i * t_r. Reduces to simulate_rs when t_e = 0 and to
/// simulate_gs_blur when t_r = 0.
Frame simulate_rscd(const FrameSequence& seq, double t,
                    const ShutterParams& shutter, const SynthesisMode& mode);

/// Brute-force reference for simulate_rscd: per-pixel temporal loop with
/// s_dense samples (>= 256) and no shared code with the simulator.
/// O(W*H*s_dense); test use only.
Frame oracle_rscd(const FrameSequence& seq, double t,
                  const ShutterParams& shutter, int s_dense);

}  // namespace rstk::formation
