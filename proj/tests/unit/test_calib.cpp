#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "rstk/calib.hpp"
#include "test_util.hpp"

using namespace rstk;

namespace {

calib::Correspondences map_grid(const calib::Homography& h, int n,
                                double lo, double hi) {
  calib::Correspondences c;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = lo + (hi - lo) * i / (n - 1);
      const double y = lo + (hi - lo) * j / (n - 1);
      const auto t = h.apply(x, y);
      c.push_back({x, y, t[0], t[1]});
    }
  return c;
}

double grid_rms_vs(const calib::Homography& a, const calib::Homography& b) {
  double acc = 0.0;
  int n = 0;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) {
      const double x = 10.0 * i, y = 10.0 * j;
      const auto pa = a.apply(x, y);
      const auto pb = b.apply(x, y);
      acc += (pa[0] - pb[0]) * (pa[0] - pb[0]) +
             (pa[1] - pb[1]) * (pa[1] - pb[1]);
      ++n;
    }
  return std::sqrt(acc / n);
}

const calib::Homography kTruth = [] {
  calib::Homography h;
  h.m = {1.02, 0.013, 4.0, -0.011, 0.97, -3.0, 1.2e-4, -0.8e-4, 1.0};
  return h;
}();

}  // namespace

TEST_CASE("four exact unit-square pairs give the identity") {
  calib::Correspondences c = {
      {0, 0, 0, 0}, {1, 0, 1, 0}, {1, 1, 1, 1}, {0, 1, 0, 1}};
  const auto fit = calib::estimate_homography(c);
  CHECK(fit.rms < 1e-10);
  for (int i = 0; i < 9; ++i) {
    const double expected = (i % 4 == 0) ? 1.0 : 0.0;
    CHECK(std::abs(fit.h.m[i] - expected) < 1e-9);
  }
}

TEST_CASE("a pure translation is recovered to machine precision") {
  calib::Homography t;
  t.m = {1, 0, 5, 0, 1, -3, 0, 0, 1};
  const auto c = map_grid(t, 3, 0.0, 40.0);
  const auto fit = calib::estimate_homography(c);
  CHECK(fit.rms < 1e-9);
  CHECK(grid_rms_vs(fit.h, t) < 1e-9);
}

TEST_CASE("a projective map is recovered exactly from clean points") {
  const auto c = map_grid(kTruth, 4, 0.0, 100.0);
  const auto fit = calib::estimate_homography(c);
  CHECK(fit.rms < 1e-9);
  CHECK(grid_rms_vs(fit.h, kTruth) < 1e-6);
}

TEST_CASE("noisy correspondences still land within a pixel") {
  rng::SplitMix64 g(71);
  calib::Correspondences c;
  for (int i = 0; i < 30; ++i) {
    const double x = g.uniform(0.0, 100.0);
    const double y = g.uniform(0.0, 100.0);
    const auto t = kTruth.apply(x, y);
    c.push_back({x, y, t[0] + 0.5 * g.normal(), t[1] + 0.5 * g.normal()});
  }
  const auto fit = calib::estimate_homography(c);
  CHECK(fit.rms < 1.0);
  CHECK(grid_rms_vs(fit.h, kTruth) < 1.0);
}

TEST_CASE("estimation is invariant to similarity-transformed inputs") {
  // scaling both point sets must not change the fitted mapping
  const auto base = map_grid(kTruth, 4, 0.0, 100.0);
  calib::Correspondences scaled;
  for (const auto& p : base)
    scaled.push_back({p.sx * 37.0 + 500.0, p.sy * 37.0 - 250.0,
                      p.tx * 0.02 - 3.0, p.ty * 0.02 + 8.0});
  const auto fit = calib::estimate_homography(scaled);
  // undo the similarity transforms and compare the composite to the truth
  calib::Homography composite;
  {
    // composite = T_t^{-1} * fit * T_s with T_s, T_t the transforms above
    calib::Homography ts, tt;
    ts.m = {37.0, 0, 500.0, 0, 37.0, -250.0, 0, 0, 1};
    tt.m = {0.02, 0, -3.0, 0, 0.02, 8.0, 0, 0, 1};
    const auto& f = fit.h.m;
    const auto& s = ts.m;
    std::array<double, 9> fs{};
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc)
        for (int k = 0; k < 3; ++k)
          fs[r * 3 + cc] += f[r * 3 + k] * s[k * 3 + cc];
    const auto ti = tt.inverse();
    std::array<double, 9> m{};
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc)
        for (int k = 0; k < 3; ++k)
          m[r * 3 + cc] += ti.m[r * 3 + k] * fs[k * 3 + cc];
    const double w = m[8];
    for (int i = 0; i < 9; ++i) composite.m[i] = m[i] / w;
  }
  CHECK(grid_rms_vs(composite, kTruth) < 1e-6);
}

TEST_CASE("insufficient or degenerate imports are rejected") {
  calib::Correspondences three = {{0, 0, 0, 0}, {1, 0, 1, 0}, {1, 1, 1, 1}};
  try {
    calib::estimate_homography(three);
    FAIL("expected a failure for three pairs");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("pairs") != std::string::npos);
  }

  calib::Correspondences collinear;
  for (int i = 0; i < 6; ++i)
    collinear.push_back({double(i), 2.0 * i, double(i), 2.0 * i});
  CHECK_THROWS(calib::estimate_homography(collinear));
}

TEST_CASE("homography application: identity, shift, and inverse round trip") {
  rng::SplitMix64 g(72);
  // band-limited texture: two bilinear resamplings must stay faithful
  Frame img(24, 18, 1);
  for (int y = 0; y < 18; ++y)
    for (int x = 0; x < 24; ++x)
      img.at(x, y, 0) = static_cast<float>(
          0.5 + 0.3 * std::sin(0.3 * x) * std::cos(0.25 * y));

  const calib::Homography id;
  CHECK(testutil::max_abs_diff(
            calib::apply_homography(img, id, warp::OobMode::zero), img) == 0.0);

  calib::Homography shift;
  shift.m = {1, 0, 1, 0, 1, 0, 0, 0, 1};  // maps x to x + 1
  const Frame shifted = calib::apply_homography(img, shift, warp::OobMode::zero);
  for (int y = 0; y < img.height; ++y)
    for (int x = 1; x < img.width; ++x)
      CHECK(shifted.at(x, y, 0) == doctest::Approx(img.at(x - 1, y, 0))
                                       .epsilon(1e-6));

  calib::Homography mild;
  mild.m = {1.01, 0.02, 0.5, -0.015, 0.99, -0.3, 1e-4, -5e-5, 1.0};
  const Frame fwd = calib::apply_homography(img, mild, warp::OobMode::clamp);
  const Frame back =
      calib::apply_homography(fwd, mild.inverse(), warp::OobMode::clamp);
  double worst = 0.0;
  for (int y = 3; y < img.height - 3; ++y)
    for (int x = 3; x < img.width - 3; ++x)
      worst = std::max(worst,
                       std::abs(double(back.at(x, y, 0)) - img.at(x, y, 0)));
  CHECK(worst < 1e-2);
}

TEST_CASE("color matrix: identity and pure gain are exact") {
  std::vector<calib::Rgb> ref;
  rng::SplitMix64 g(73);
  for (int i = 0; i < 12; ++i)
    ref.push_back({g.uniform01(), g.uniform01(), g.uniform01()});

  const auto id_fit = calib::estimate_color_matrix(ref, ref);
  CHECK(id_fit.rms < 1e-12);
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(id_fit.m[i] - (i % 4 == 0 ? 1.0 : 0.0)) < 1e-9);

  std::vector<calib::Rgb> halved;
  for (const auto& p : ref)
    halved.push_back({0.5 * p[0], 0.5 * p[1], 0.5 * p[2]});
  const auto gain_fit = calib::estimate_color_matrix(halved, ref);
  CHECK(gain_fit.rms < 1e-12);
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(gain_fit.m[i] - (i % 4 == 0 ? 2.0 : 0.0)) < 1e-9);
}

TEST_CASE("color matrix survives measurement noise") {
  const std::array<double, 9> truth = {0.9, 0.1, 0.02, 0.05, 1.1, -0.03,
                                       -0.02, 0.04, 0.95};
  rng::SplitMix64 g(74);
  std::vector<calib::Rgb> measured, ref;
  for (int i = 0; i < 24; ++i) {
    const calib::Rgb m = {g.uniform(0.05, 0.95), g.uniform(0.05, 0.95),
                          g.uniform(0.05, 0.95)};
    calib::Rgb r{};
    for (int rr = 0; rr < 3; ++rr)
      r[rr] = truth[rr * 3] * m[0] + truth[rr * 3 + 1] * m[1] +
              truth[rr * 3 + 2] * m[2] + 0.005 * g.normal();
    measured.push_back(m);
    ref.push_back(r);
  }
  const auto fit = calib::estimate_color_matrix(measured, ref);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(fit.m[i] - truth[i]) < 0.02);
}

TEST_CASE("color matrix rejects rank-deficient patch sets") {
  std::vector<calib::Rgb> gray, ref;
  for (int i = 0; i < 8; ++i) {
    const double v = 0.1 * (i + 1);
    gray.push_back({v, v, v});
    ref.push_back({v, v, v});
  }
  CHECK_THROWS(calib::estimate_color_matrix(gray, ref));
  CHECK_THROWS(calib::estimate_color_matrix(
      std::vector<calib::Rgb>{{0.1, 0.2, 0.3}},
      std::vector<calib::Rgb>{{0.1, 0.2, 0.3}}));
}

TEST_CASE("correspondences CSV: happy path and malformed inputs") {
  testutil::TempDir dir("calib_csv");
  const auto good = dir.path / "good.csv";
  {
    std::ofstream f(good);
    f << "sx,sy,tx,ty\n";
    f << "0,0,1,1\n";
    f << "10,0,11, 1\n";
    f << "10,10,11,11\n";
  }
  const auto c = calib::load_correspondences_csv(good);
  REQUIRE(c.size() == 3);
  CHECK(c[1].sx == 10.0);
  CHECK(c[1].ty == 1.0);

  const auto bad_header = dir.path / "bad_header.csv";
  {
    std::ofstream f(bad_header);
    f << "x,y,u,v\n0,0,1,1\n";
  }
  CHECK_THROWS(calib::load_correspondences_csv(bad_header));

  const auto bad_row = dir.path / "bad_row.csv";
  {
    std::ofstream f(bad_row);
    f << "sx,sy,tx,ty\n0,0,1,1\n5,oops,2,2\n";
  }
  try {
    calib::load_correspondences_csv(bad_row);
    FAIL("expected malformed-row failure");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }

  CHECK_THROWS(calib::load_correspondences_csv(dir.path / "missing.csv"));
}
