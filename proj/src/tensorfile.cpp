#include "rstk/tensorfile.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rstk::io {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'T', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::uint64_t count = 1;
  for (std::uint64_t d : t.dims) {
    if (d == 0) throw std::invalid_argument("write_tensor: zero dimension");
    if (count > std::numeric_limits<std::uint64_t>::max() / d)
      throw std::invalid_argument("write_tensor: dimension overflow");
    count *= d;
  }
  if (t.data.size() != count)
    throw std::invalid_argument("write_tensor: payload length mismatch");

  std::string buf;
  buf.reserve(16 + 8 * t.dims.size() + 4 * t.data.size());
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(t.dims.size()));
  for (std::uint64_t d : t.dims) put_u64(buf, d);
  for (float f : t.data) put_u32(buf, std::bit_cast<std::uint32_t>(f));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_tensor: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write_tensor: write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_tensor: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("read_tensor: not a tensor file: " + path.string());
  if (get_u32(bytes.data() + 4) != kVersion)
    throw std::runtime_error("read_tensor: unsupported version in " +
                             path.string());
  const std::uint32_t ndim = get_u32(bytes.data() + 8);
  const std::size_t header = 12 + 8 * static_cast<std::size_t>(ndim);
  if (bytes.size() < header)
    throw std::runtime_error("read_tensor: truncated header: " + path.string());

  Tensor t;
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    const std::uint64_t d = get_u64(bytes.data() + 12 + 8 * i);
    if (d == 0 || count > std::numeric_limits<std::uint64_t>::max() / d)
      throw std::runtime_error("read_tensor: bad dimensions: " + path.string());
    count *= d;
    t.dims.push_back(d);
  }
  if (bytes.size() != header + 4 * count)
    throw std::runtime_error("read_tensor: payload length mismatch: " +
                             path.string());

  t.data.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    t.data[i] = std::bit_cast<float>(get_u32(bytes.data() + header + 4 * i));
  return t;
}

Tensor to_tensor(const Frame& f) {
  require_valid(f, "to_tensor");
  return {{static_cast<std::uint64_t>(f.height),
           static_cast<std::uint64_t>(f.width),
           static_cast<std::uint64_t>(f.channels)},
          f.data};
}

Tensor to_tensor(const warp::DisplacementField& f) {
  warp::require_valid(f, "to_tensor");
  return {{static_cast<std::uint64_t>(f.height),
           static_cast<std::uint64_t>(f.width), 2},
          f.data};
}

Frame frame_from_tensor(const Tensor& t) {
  if (t.dims.size() != 3)
    throw std::invalid_argument("frame_from_tensor: needs 3 dims [H, W, C]");
  Frame f(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]),
          static_cast<int>(t.dims[2]));
  f.data = t.data;
  require_valid(f, "frame_from_tensor");
  return f;
}

warp::DisplacementField field_from_tensor(const Tensor& t) {
  if (t.dims.size() != 3 || t.dims[2] != 2)
    throw std::invalid_argument("field_from_tensor: needs dims [H, W, 2]");
  warp::DisplacementField f(static_cast<int>(t.dims[1]),
                            static_cast<int>(t.dims[0]));
  f.data = t.data;
  warp::require_valid(f, "field_from_tensor");
  return f;
}

}  // namespace rstk::io
