#include "rstk/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rstk/random.hpp"

namespace rstk::synth {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

struct Waves {
  double phase[3];
};

// Seeded per channel; wavelengths are tied to the frame size so the
// texture stays band-limited at any resolution.
Waves waves_for(const SceneParams& p, int channel) {
  rng::SplitMix64 r(p.seed ^ (0x9E3779B97F4A7C15ull * (channel + 1)));
  Waves w;
  for (double& ph : w.phase) ph = r.uniform(0.0, kTau);
  return w;
}

double texture(const SceneParams& p, const Waves& w, double x, double y) {
  const double lx = p.width / 2.5;
  const double ly = p.height / 2.5;
  const double ld = (p.width + p.height) / 4.0;
  return 0.5 + 0.18 * std::sin(kTau * x / lx + w.phase[0]) +
         0.12 * std::sin(kTau * y / ly + w.phase[1]) +
         0.10 * std::sin(kTau * (x / ld + y / ld) + w.phase[2]);
}

void check(const SceneParams& p) {
  if (p.width < 1 || p.height < 1 || p.channels < 1)
    throw std::invalid_argument("generate_scene: dimensions must be >= 1");
  if (p.frame_count < 2)
    throw std::invalid_argument("generate_scene: needs >= 2 frames");
  if (!(p.fps > 0.0))
    throw std::invalid_argument("generate_scene: fps must be > 0");
  if (p.generator == "checker" && p.checker_cell < 1)
    throw std::invalid_argument("generate_scene: checker_cell must be >= 1");
}

}  // namespace

float pan_scene_value(const SceneParams& p, double x, double y, int channel,
                      double t) {
  const Waves w = waves_for(p, channel);
  return static_cast<float>(
      texture(p, w, x - p.velocity_x * t, y - p.velocity_y * t));
}

FrameSequence generate_scene(const SceneParams& p) {
  check(p);
  FrameSequence seq;
  seq.dt = 1.0 / p.fps;
  seq.t0 = p.t0;

  std::vector<Waves> waves;
  for (int c = 0; c < p.channels; ++c) waves.push_back(waves_for(p, c));

  const double span = (p.frame_count - 1) * seq.dt;
  const double cx = 0.5 * (p.width - 1), cy = 0.5 * (p.height - 1);

  for (int k = 0; k < p.frame_count; ++k) {
    const double t = seq.time_of(k);
    Frame f(p.width, p.height, p.channels);

    if (p.generator == "pan") {
      for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x)
          for (int c = 0; c < p.channels; ++c)
            f.at(x, y, c) = static_cast<float>(
                texture(p, waves[c], x - p.velocity_x * t,
                        y - p.velocity_y * t));
    } else if (p.generator == "rotonly_text") {
      const double th = -p.angular_velocity * t;
      const double ct = std::cos(th), st = std::sin(th);
      for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x) {
          const double rx = ct * (x - cx) - st * (y - cy) + cx;
          const double ry = st * (x - cx) + ct * (y - cy) + cy;
          for (int c = 0; c < p.channels; ++c)
            f.at(x, y, c) = static_cast<float>(texture(p, waves[c], rx, ry));
        }
    } else if (p.generator == "ramp") {
      const double tau = span > 0.0 ? (t - p.t0) / span : 0.0;
      const double bright = 0.4 + 0.5 * tau;
      for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x)
          for (int c = 0; c < p.channels; ++c)
            f.at(x, y, c) = static_cast<float>(
                (0.2 + 0.6 * x / std::max(p.width - 1, 1)) * bright *
                (1.0 - 0.08 * c));
    } else if (p.generator == "checker") {
      for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x) {
          const float v =
              ((x / p.checker_cell + y / p.checker_cell) % 2) ? 1.0f : 0.0f;
          for (int c = 0; c < p.channels; ++c) f.at(x, y, c) = v;
        }
    } else if (p.generator == "noise") {
      rng::SplitMix64 r(p.seed ^ (0xD1B54A32D192ED03ull * (k + 1)));
      for (float& v : f.data) v = static_cast<float>(r.uniform01());
    } else {
      throw std::invalid_argument("generate_scene: unknown generator '" +
                                  p.generator + "'");
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

FrameSequence apply_frame_gains(const FrameSequence& seq,
                                const std::vector<double>& gains) {
  require_valid(seq, "apply_frame_gains");
  if (gains.size() != seq.frames.size())
    throw std::invalid_argument(
        "apply_frame_gains: one gain per frame required");
  FrameSequence out = seq;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    if (!std::isfinite(gains[k]))
      throw std::invalid_argument("apply_frame_gains: non-finite gain");
    for (float& v : out.frames[k].data)
      v = static_cast<float>(gains[k] * v);
  }
  return out;
}

}  // namespace rstk::synth
