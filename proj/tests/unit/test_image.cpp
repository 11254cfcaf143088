#include <cmath>
#include <fstream>

#include <doctest.h>

#include "rstk/image.hpp"
#include "rstk/refimpl.hpp"
#include "test_util.hpp"

using namespace rstk;
using testutil::TempDir;

TEST_CASE("png full-scale and black decode to exact endpoints") {
  TempDir tmp("image_endpoints");
  Frame one(4, 3, 1, 1.0f);
  save_image(one, tmp.path / "one.png", Transfer::linear, 8);
  const Frame r1 = load_image(tmp.path / "one.png", Transfer::linear);
  for (float v : r1.data) CHECK(v == 1.0f);

  Frame zero(4, 3, 3, 0.0f);
  save_image(zero, tmp.path / "zero.png", Transfer::srgb, 8);
  const Frame r0 = load_image(tmp.path / "zero.png", Transfer::srgb);
  for (float v : r0.data) CHECK(v == 0.0f);
}

TEST_CASE("8-bit code 128 decodes through the srgb transfer") {
  TempDir tmp("image_128");
  // a linear write of 128/255 stores raw code 128
  Frame f(2, 2, 1, 128.0f / 255.0f);
  save_image(f, tmp.path / "mid.png", Transfer::linear, 8);
  const Frame r = load_image(tmp.path / "mid.png", Transfer::srgb);
  const double expected = ref::srgb_decode(128.0 / 255.0);
  for (float v : r.data) {
    CHECK(v == doctest::Approx(expected).epsilon(1e-6));
    CHECK(v == doctest::Approx(0.2158).epsilon(2e-3));
  }
}

TEST_CASE("16-bit save/load round trip is within one quantization step") {
  TempDir tmp("image_roundtrip16");
  Frame f(5, 4, 3, 0.5f);
  save_image(f, tmp.path / "half.png", Transfer::linear, 16);
  const Frame r = load_image(tmp.path / "half.png", Transfer::linear);
  CHECK(testutil::max_abs_diff(f, r) <= 1.0 / 65535.0);

  rng::SplitMix64 g(7);
  const Frame rf = testutil::random_frame(8, 6, 3, g);
  save_image(rf, tmp.path / "rand.png", Transfer::linear, 16);
  const Frame rr = load_image(tmp.path / "rand.png", Transfer::linear);
  CHECK(testutil::max_abs_diff(rf, rr) <= 1.0 / 65535.0);
}

TEST_CASE("8-bit srgb round trip matches the per-sample quantization oracle") {
  TempDir tmp("image_roundtrip8");
  rng::SplitMix64 g(11);
  const Frame f = testutil::random_frame(9, 7, 3, g);
  save_image(f, tmp.path / "rand.png", Transfer::srgb, 8);
  const Frame r = load_image(tmp.path / "rand.png", Transfer::srgb);
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    const double encoded = linear_to_srgb(f.data[i]);
    const double code = std::lround(encoded * 255.0);
    const double expected = ref::srgb_decode(code / 255.0);
    CHECK(std::abs(r.data[i] - expected) < 1e-6);
  }
}

TEST_CASE("transfer conversion endpoints and inverse pair") {
  Frame z(2, 2, 1, 0.0f), o(2, 2, 1, 1.0f), h(2, 2, 1, 0.5f);
  CHECK(convert_transfer(z, TransferDirection::srgb_to_linear).data[0] == 0.0f);
  CHECK(convert_transfer(z, TransferDirection::linear_to_srgb).data[0] == 0.0f);
  CHECK(convert_transfer(o, TransferDirection::srgb_to_linear).data[0] == 1.0f);
  CHECK(convert_transfer(o, TransferDirection::linear_to_srgb).data[0] == 1.0f);

  const Frame round = convert_transfer(
      convert_transfer(h, TransferDirection::srgb_to_linear),
      TransferDirection::linear_to_srgb);
  CHECK(std::abs(round.data[0] - 0.5) < 1e-6);

  rng::SplitMix64 g(3);
  const Frame f = testutil::random_frame(6, 5, 3, g);
  const Frame back = convert_transfer(
      convert_transfer(f, TransferDirection::linear_to_srgb),
      TransferDirection::srgb_to_linear);
  CHECK(testutil::max_abs_diff(f, back) < 1e-6);
}

TEST_CASE("conversion rejects out-of-range and non-finite samples") {
  Frame f(2, 2, 1, 1.5f);
  CHECK_THROWS(convert_transfer(f, TransferDirection::srgb_to_linear));
  f.data[0] = std::nanf("");
  CHECK_THROWS(convert_transfer(f, TransferDirection::linear_to_srgb));
  Frame nanf(2, 2, 1, 0.5f);
  nanf.data[2] = std::numeric_limits<float>::infinity();
  TempDir tmp("image_reject");
  CHECK_THROWS(save_image(nanf, tmp.path / "bad.png", Transfer::linear, 8));
}

TEST_CASE("save rejects unsupported channel counts and depths") {
  TempDir tmp("image_badsave");
  Frame two(2, 2, 2, 0.5f);
  CHECK_THROWS(save_image(two, tmp.path / "c2.png", Transfer::linear, 8));
  Frame ok(2, 2, 1, 0.5f);
  CHECK_THROWS(save_image(ok, tmp.path / "d12.png", Transfer::linear, 12));
  CHECK_THROWS(load_image(tmp.path / "missing.png", Transfer::linear));
}

TEST_CASE("sequence manifest loads frames in listed order") {
  TempDir tmp("image_manifest");
  Frame a(3, 2, 1, 0.25f), b(3, 2, 1, 0.75f);
  save_image(a, tmp.path / "a.png", Transfer::linear, 16);
  save_image(b, tmp.path / "b.png", Transfer::linear, 16);
  {
    std::ofstream out(tmp.path / "seq.json");
    out << R"({"dt_s": 0.01, "t0_s": 0.5, "frames": ["a.png", "b.png"]})";
  }
  const FrameSequence seq =
      load_sequence_manifest(tmp.path / "seq.json", Transfer::linear);
  CHECK(seq.count() == 2);
  CHECK(seq.dt == doctest::Approx(0.01));
  CHECK(seq.t0 == doctest::Approx(0.5));
  CHECK(seq.frames[0].data[0] == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(seq.frames[1].data[0] == doctest::Approx(0.75).epsilon(1e-4));
}
