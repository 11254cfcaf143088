#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rstk/image.hpp"

namespace rstk::synth {

/// Seed-deterministic synthetic scenes rendered as frame sequences.
/// Generators:
///   pan          smooth band-limited texture translating at (vx, vy) px/s
///   rotonly_text the same texture rotating about the image center
///   ramp         horizontal ramp with a brightness ramp linear in time
///   checker      static checkerboard
///   noise        per-frame independent uniform noise
struct SceneParams {
  std::string generator = "pan";
  int width = 64;
  int height = 64;
  int channels = 1;
  int frame_count = 8;
  double fps = 240.0;
  double t0 = 0.0;
  double velocity_x = 0.0;        // pan, px/s
  double velocity_y = 0.0;        // pan, px/s
  double angular_velocity = 0.0;  // rotonly_text, rad/s
  int checker_cell = 4;           // checker, px
  std::uint64_t seed = 1;
};

FrameSequence generate_scene(const SceneParams& p);

/// Continuous-space evaluation of the pan scene at time t; backs analytic
/// ground-truth checks against the simulators.
float pan_scene_value(const SceneParams& p, double x, double y, int channel,
                      double t);

/// Framewise multiplicative brightness modulation (gains[k] scales frame k).
FrameSequence apply_frame_gains(const FrameSequence& seq,
                                const std::vector<double>& gains);

}  // namespace rstk::synth
