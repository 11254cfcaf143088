#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "rstk/tensorfile.hpp"
#include "test_util.hpp"

using namespace rstk;

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

void dump(const std::filesystem::path& p,
          const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::uint64_t read_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

TEST_CASE("tensor files survive a bitwise round trip") {
  testutil::TempDir dir("tensor_rt");
  rng::SplitMix64 g(91);
  io::Tensor t;
  t.dims = {3, 5, 2};
  t.data.resize(30);
  for (float& v : t.data) v = static_cast<float>(g.uniform(-10.0, 10.0));
  const auto path = dir.path / "t.rstf";
  io::write_tensor(path, t);
  const io::Tensor back = io::read_tensor(path);
  REQUIRE(back.dims == t.dims);
  REQUIRE(back.data.size() == t.data.size());
  CHECK(std::memcmp(back.data.data(), t.data.data(),
                    t.data.size() * sizeof(float)) == 0);
}

TEST_CASE("the on-disk layout is exactly as documented") {
  testutil::TempDir dir("tensor_layout");
  io::Tensor t;
  t.dims = {2, 3};
  t.data = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f};
  const auto path = dir.path / "t.rstf";
  io::write_tensor(path, t);

  const auto bytes = slurp(path);
  REQUIRE(bytes.size() == 4 + 4 + 4 + 2 * 8 + 6 * 4);
  CHECK(bytes[0] == 'R');
  CHECK(bytes[1] == 'S');
  CHECK(bytes[2] == 'T');
  CHECK(bytes[3] == 'F');
  // u32 little-endian version 1
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 0);
  CHECK(bytes[7] == 0);
  // u32 little-endian ndim 2
  CHECK(bytes[8] == 2);
  CHECK(read_u64(&bytes[12]) == 2);
  CHECK(read_u64(&bytes[20]) == 3);
  float first = 0.0f;
  std::memcpy(&first, &bytes[28], 4);
  CHECK(first == 1.0f);
}

TEST_CASE("corrupt tensor files are rejected") {
  testutil::TempDir dir("tensor_bad");
  io::Tensor t;
  t.dims = {2, 2};
  t.data = {1, 2, 3, 4};
  const auto path = dir.path / "t.rstf";
  io::write_tensor(path, t);
  const auto good = slurp(path);

  auto wrong_magic = good;
  wrong_magic[0] = 'X';
  dump(dir.path / "magic.rstf", wrong_magic);
  CHECK_THROWS(io::read_tensor(dir.path / "magic.rstf"));

  auto wrong_version = good;
  wrong_version[4] = 2;
  dump(dir.path / "version.rstf", wrong_version);
  CHECK_THROWS(io::read_tensor(dir.path / "version.rstf"));

  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  dump(dir.path / "short.rstf", truncated);
  CHECK_THROWS(io::read_tensor(dir.path / "short.rstf"));

  auto zero_dim = good;
  for (int i = 0; i < 8; ++i) zero_dim[12 + i] = 0;
  dump(dir.path / "zero.rstf", zero_dim);
  CHECK_THROWS(io::read_tensor(dir.path / "zero.rstf"));

  CHECK_THROWS(io::read_tensor(dir.path / "absent.rstf"));
}

TEST_CASE("writing an inconsistent tensor is rejected") {
  testutil::TempDir dir("tensor_invalid");
  io::Tensor t;
  t.dims = {2, 3};
  t.data = {1, 2, 3};  // should be 6
  CHECK_THROWS(io::write_tensor(dir.path / "bad.rstf", t));
  io::Tensor empty;
  CHECK_THROWS(io::write_tensor(dir.path / "empty.rstf", empty));
}

TEST_CASE("frames map to [H, W, C] tensors and back") {
  rng::SplitMix64 g(92);
  const Frame f = testutil::random_frame(7, 4, 3, g);
  const io::Tensor t = io::to_tensor(f);
  REQUIRE(t.dims == std::vector<std::uint64_t>{4, 7, 3});
  const Frame back = io::frame_from_tensor(t);
  CHECK(back.width == 7);
  CHECK(back.height == 4);
  CHECK(back.channels == 3);
  CHECK(testutil::max_abs_diff(back, f) == 0.0);
  CHECK(t.data[(2 * 7 + 5) * 3 + 1] == f.at(5, 2, 1));
}

TEST_CASE("fields map to [H, W, 2] tensors and back") {
  warp::DisplacementField d(5, 3);
  rng::SplitMix64 g(93);
  for (float& v : d.data) v = static_cast<float>(g.uniform(-4.0, 4.0));
  const io::Tensor t = io::to_tensor(d);
  REQUIRE(t.dims == std::vector<std::uint64_t>{3, 5, 2});
  const warp::DisplacementField back = io::field_from_tensor(t);
  REQUIRE(back.width == 5);
  REQUIRE(back.height == 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) {
      CHECK(back.u(x, y) == d.u(x, y));
      CHECK(back.v(x, y) == d.v(x, y));
    }
}

TEST_CASE("tensor-to-struct conversions check their dims") {
  io::Tensor t;
  t.dims = {4, 4};
  t.data.assign(16, 0.0f);
  CHECK_THROWS(io::frame_from_tensor(t));
  CHECK_THROWS(io::field_from_tensor(t));
  io::Tensor t3;
  t3.dims = {4, 4, 3};
  t3.data.assign(48, 0.0f);
  CHECK_THROWS(io::field_from_tensor(t3));  // last dim must be 2
}
