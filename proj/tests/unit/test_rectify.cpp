#include <cmath>

#include <doctest.h>

#include "rstk/formation.hpp"
#include "rstk/metrics.hpp"
#include "rstk/rectify.hpp"
#include "rstk/synth.hpp"
#include "test_util.hpp"

using namespace rstk;
using testutil::max_abs_diff;

namespace {

Frame crop(const Frame& f, int margin) {
  Frame out(f.width - 2 * margin, f.height - 2 * margin, f.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < f.channels; ++c)
        out.at(x, y, c) = f.at(x + margin, y + margin, c);
  return out;
}

double interior_psnr(const Frame& a, const Frame& b, int margin) {
  return metrics::psnr(crop(a, margin), crop(b, margin));
}

struct RoundTrip {
  Frame gs;
  Frame rs;
  FrameSequence seq;
  ShutterParams shutter;
  double t;
  rectify::GlobalMotion motion;
};

RoundTrip make_round_trip(double vx, double vy, std::uint64_t seed) {
  synth::SceneParams p;
  p.width = p.height = 48;
  p.frame_count = 24;
  p.fps = 2400.0;
  p.velocity_x = vx;
  p.velocity_y = vy;
  p.seed = seed;
  RoundTrip rt;
  rt.seq = synth::generate_scene(p);
  rt.shutter = ShutterParams{4.0 * rt.seq.dt / p.height, 0.0};
  // lands on a knot: t_m = 2 dt, so t = t0 + 10 dt and the clean reference
  // needs no temporal blending
  rt.t = rt.seq.t0 + rt.shutter.mid_offset(p.height) + 8.0 * rt.seq.dt;
  rt.motion = rectify::GlobalMotion{vx, vy};
  rt.rs = formation::simulate_rs(rt.seq, rt.t, rt.shutter,
                                 formation::interpolate_mode());
  rt.gs = formation::sample_gs(rt.seq, rt.t, formation::interpolate_mode());
  return rt;
}

}  // namespace

TEST_CASE("row offsets follow t_m - i * t_r and vanish at the middle row") {
  const Frame rs(8, 16, 1, 0.5f);
  const ShutterParams sh{1e-4, 0.0};
  const auto r = rectify::rectify_global(rs, {0.0, 0.0}, sh);
  REQUIRE(r.row_offsets.size() == 16);
  const double t_m = sh.mid_offset(16);
  for (int i = 0; i < 16; ++i)
    CHECK(r.row_offsets[i] == doctest::Approx(t_m - i * sh.t_r).epsilon(1e-15));
  CHECK(r.row_offsets[8] == 0.0);
}

TEST_CASE("zero velocity or zero readout leaves the frame untouched") {
  rng::SplitMix64 g(41);
  const Frame rs = testutil::random_frame(12, 10, 3, g);
  const ShutterParams sh{1e-4, 0.0};
  const auto still = rectify::rectify_global(rs, {0.0, 0.0}, sh);
  CHECK(max_abs_diff(still.output, rs) < 1e-7);
  for (float m : still.mask.data) CHECK(m == doctest::Approx(1.0));

  const auto instant =
      rectify::rectify_global(rs, {250.0, -120.0}, ShutterParams{0.0, 0.0});
  CHECK(max_abs_diff(instant.output, rs) < 1e-7);
}

TEST_CASE("global rectification inverts a synthetic rolling shutter") {
  const auto rt = make_round_trip(1200.0, 600.0, 42);
  const double before = interior_psnr(rt.rs, rt.gs, 6);
  const auto r = rectify::rectify_global(rt.rs, rt.motion, rt.shutter);
  const double after = interior_psnr(r.output, rt.gs, 6);
  CHECK(after > 40.0);
  CHECK(after > before + 10.0);
}

TEST_CASE("rectification quality degrades as the motion estimate drifts") {
  const auto rt = make_round_trip(1000.0, -500.0, 43);
  auto quality = [&](double scale) {
    const rectify::GlobalMotion m{rt.motion.vx * scale, rt.motion.vy * scale};
    return interior_psnr(rectify::rectify_global(rt.rs, m, rt.shutter).output,
                         rt.gs, 6);
  };
  const double exact = quality(1.0);
  const double off15 = quality(1.5);
  const double off20 = quality(2.0);
  CHECK(exact > off15);
  CHECK(off15 > off20);
}

TEST_CASE("flow-driven rectification with uniform flow matches global") {
  const auto rt = make_round_trip(700.0, 350.0, 44);
  const double dt = rt.seq.dt;
  const warp::DisplacementField uniform(
      48, 48, static_cast<float>(rt.motion.vx * dt),
      static_cast<float>(rt.motion.vy * dt));
  const auto via_flow =
      rectify::rectify_with_flow(rt.rs, uniform, dt, rt.shutter);
  const auto via_global = rectify::rectify_global(rt.rs, rt.motion, rt.shutter);
  CHECK(max_abs_diff(via_flow.output, via_global.output) < 1e-5);
  CHECK(max_abs_diff(via_flow.mask, via_global.mask) < 1e-5);
}

TEST_CASE("flow-driven rectification trivial cases are identities") {
  rng::SplitMix64 g(45);
  const Frame rs = testutil::random_frame(10, 8, 1, g);
  const warp::DisplacementField zero(10, 8);
  const ShutterParams sh{1e-4, 0.0};
  const auto r0 = rectify::rectify_with_flow(rs, zero, 0.01, sh);
  CHECK(max_abs_diff(r0.output, rs) < 1e-7);

  warp::DisplacementField any(10, 8, 4.0f, -2.0f);
  const auto r1 =
      rectify::rectify_with_flow(rs, any, 0.01, ShutterParams{0.0, 0.0});
  CHECK(max_abs_diff(r1.output, rs) < 1e-7);

  CHECK_THROWS(rectify::rectify_with_flow(rs, zero, 0.0, sh));
}

TEST_CASE("fusion returns the primary frame when neighbors carry no weight") {
  rng::SplitMix64 g(46);
  rectify::RectifyResult primary;
  primary.output = testutil::random_frame(9, 7, 3, g);
  primary.mask = Frame(9, 7, 1, 1.0f);
  warp::WarpResult none;
  none.frame = Frame(9, 7, 3, 0.33f);
  none.mask = Frame(9, 7, 1, 0.0f);
  const Frame fused = rectify::fuse_aligned(primary, none, none);
  CHECK(max_abs_diff(fused, primary.output) == 0.0);
}

TEST_CASE("fusion fills a hole from the only valid neighbor") {
  rectify::RectifyResult primary;
  primary.output = Frame(6, 5, 1, 0.2f);
  primary.mask = Frame(6, 5, 1, 1.0f);
  primary.mask.at(3, 2, 0) = 0.0f;
  primary.output.at(3, 2, 0) = 0.0f;

  warp::WarpResult prev;
  prev.frame = Frame(6, 5, 1, 0.9f);
  prev.mask = Frame(6, 5, 1, 0.0f);
  prev.mask.at(3, 2, 0) = 1.0f;
  warp::WarpResult next;
  next.frame = Frame(6, 5, 1, 0.7f);
  next.mask = Frame(6, 5, 1, 0.0f);

  const Frame fused = rectify::fuse_aligned(primary, prev, next);
  CHECK(fused.at(3, 2, 0) == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(fused.at(0, 0, 0) == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("fusion averages equally weighted sources") {
  rectify::RectifyResult primary;
  primary.output = Frame(4, 4, 1, 0.3f);
  primary.mask = Frame(4, 4, 1, 1.0f);
  warp::WarpResult prev;
  prev.frame = Frame(4, 4, 1, 0.6f);
  prev.mask = Frame(4, 4, 1, 1.0f);
  warp::WarpResult next;
  next.frame = Frame(4, 4, 1, 0.9f);
  next.mask = Frame(4, 4, 1, 1.0f);
  const Frame fused = rectify::fuse_aligned(primary, prev, next);
  for (float v : fused.data) CHECK(v == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("fusion floods from a single valid pixel") {
  rectify::RectifyResult primary;
  primary.output = Frame(5, 4, 1, 0.0f);
  primary.mask = Frame(5, 4, 1, 0.0f);
  primary.output.at(1, 1, 0) = 0.8f;
  primary.mask.at(1, 1, 0) = 1.0f;
  warp::WarpResult none;
  none.frame = Frame(5, 4, 1, 0.0f);
  none.mask = Frame(5, 4, 1, 0.0f);
  const Frame fused = rectify::fuse_aligned(primary, none, none);
  for (float v : fused.data) CHECK(v == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("fusion with no valid source anywhere is an error") {
  rectify::RectifyResult primary;
  primary.output = Frame(4, 4, 1, 0.0f);
  primary.mask = Frame(4, 4, 1, 0.0f);
  warp::WarpResult none;
  none.frame = Frame(4, 4, 1, 0.0f);
  none.mask = Frame(4, 4, 1, 0.0f);
  CHECK_THROWS(rectify::fuse_aligned(primary, none, none));
}

TEST_CASE("fusion rejects mismatched shapes") {
  rectify::RectifyResult primary;
  primary.output = Frame(4, 4, 1, 0.1f);
  primary.mask = Frame(4, 4, 1, 1.0f);
  warp::WarpResult bad;
  bad.frame = Frame(5, 4, 1, 0.1f);
  bad.mask = Frame(5, 4, 1, 1.0f);
  warp::WarpResult ok;
  ok.frame = Frame(4, 4, 1, 0.1f);
  ok.mask = Frame(4, 4, 1, 1.0f);
  CHECK_THROWS(rectify::fuse_aligned(primary, bad, ok));
}
