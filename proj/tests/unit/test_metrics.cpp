#include <cmath>

#include <doctest.h>

#include "rstk/metrics.hpp"
#include "rstk/refimpl.hpp"
#include "test_util.hpp"

using namespace rstk;

TEST_CASE("psnr of identical frames is infinite") {
  rng::SplitMix64 g(81);
  const Frame a = testutil::random_frame(16, 16, 3, g);
  CHECK(std::isinf(metrics::psnr(a, a)));
  CHECK(metrics::psnr(a, a) > 0.0);
}

TEST_CASE("a uniform 0.1 offset scores exactly 20 dB at unit peak") {
  rng::SplitMix64 g(82);
  const Frame a = testutil::random_frame(32, 32, 3, g, 0.2f, 0.8f);
  Frame b = a;
  for (float& v : b.data) v += 0.1f;
  CHECK(std::abs(metrics::psnr(a, b) - 20.0) < 1e-3);
  // quadrupled peak adds 20 log10(4)
  CHECK(std::abs(metrics::psnr(a, b, 4.0) - 20.0 - 20.0 * std::log10(4.0)) <
        1e-3);
}

TEST_CASE("psnr agrees with a directly measured rmse") {
  rng::SplitMix64 g(83);
  const Frame a = testutil::random_frame(24, 24, 1, g);
  Frame b = a;
  for (float& v : b.data)
    v = std::min(1.0f, std::max(0.0f, v + static_cast<float>(
                                              g.uniform(-0.05, 0.05))));
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - b.data[i];
    mse += d * d;
  }
  mse /= a.data.size();
  CHECK(std::abs(metrics::psnr(a, b) + 10.0 * std::log10(mse)) < 0.1);
}

TEST_CASE("ssim of a frame with itself is one") {
  rng::SplitMix64 g(84);
  const Frame a = testutil::random_frame(16, 16, 3, g);
  CHECK(metrics::ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim of constant frames matches the closed form") {
  const Frame a(16, 16, 1, 0.5f);
  const Frame b(16, 16, 1, 0.52f);
  CHECK(std::abs(metrics::ssim(a, b) - ref::ssim_constant(0.5, 0.52)) < 1e-8);
  CHECK(metrics::ssim(a, b) < 1.0);
}

TEST_CASE("ssim is symmetric") {
  rng::SplitMix64 g(85);
  const Frame a = testutil::random_frame(20, 20, 1, g);
  Frame b = a;
  for (float& v : b.data)
    v = std::min(1.0f, std::max(0.0f, v + static_cast<float>(
                                              g.uniform(-0.1, 0.1))));
  CHECK(std::abs(metrics::ssim(a, b) - metrics::ssim(b, a)) < 1e-9);
}

TEST_CASE("ssim shrugs off a zero-mean intensity dither") {
  rng::SplitMix64 g(86);
  const Frame a = testutil::random_frame(24, 24, 1, g, 0.3f, 0.7f);
  Frame b = a;
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x)
      b.at(x, y, 0) += ((x + y) % 2) ? 0.01f : -0.01f;
  CHECK(metrics::ssim(a, b) > 0.9);
}

TEST_CASE("unrelated noise has near-zero structural similarity") {
  double acc = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    rng::SplitMix64 g(100 + trial);
    const Frame a = testutil::random_frame(64, 64, 1, g);
    const Frame b = testutil::random_frame(64, 64, 1, g);
    acc += std::abs(metrics::ssim(a, b));
  }
  CHECK(acc / 10.0 < 0.1);
}

TEST_CASE("row discontinuity: flat, alternating, and ramp closed forms") {
  const Frame flat(8, 8, 1, 0.4f);
  CHECK(metrics::row_discontinuity(flat) == 0.0);

  Frame alt(8, 8, 1, 0.0f);
  for (int y = 1; y < 8; y += 2)
    for (int x = 0; x < 8; ++x) alt.at(x, y, 0) = 1.0f;
  CHECK(metrics::row_discontinuity(alt) == doctest::Approx(1.0));

  const int h = 9;
  Frame ramp(4, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < 4; ++x)
      ramp.at(x, y, 0) = static_cast<float>(y) / (h - 1);
  CHECK(metrics::row_discontinuity(ramp) ==
        doctest::Approx(1.0 / (h - 1)).epsilon(1e-6));
}

TEST_CASE("row discontinuity flags striping on a smooth base") {
  Frame clean(32, 32, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      clean.at(x, y, 0) = 0.4f + 0.2f * y / 31.0f;
  Frame striped = clean;
  for (int y = 0; y < 32; ++y) {
    const float gain = (y % 2) ? 1.05f : 0.95f;
    for (int x = 0; x < 32; ++x) striped.at(x, y, 0) *= gain;
  }
  CHECK(metrics::row_discontinuity(striped) >
        4.0 * metrics::row_discontinuity(clean));
}

TEST_CASE("metric preconditions") {
  const Frame a(16, 16, 1, 0.5f);
  const Frame b(16, 15, 1, 0.5f);
  CHECK_THROWS(metrics::psnr(a, b));
  CHECK_THROWS(metrics::ssim(a, b));
  CHECK_THROWS(metrics::ssim(Frame(10, 10, 1, 0.5f), Frame(10, 10, 1, 0.5f)));
  CHECK_THROWS(metrics::row_discontinuity(Frame(8, 1, 1, 0.5f)));
  CHECK_THROWS(metrics::psnr(a, a, 0.0));
}
