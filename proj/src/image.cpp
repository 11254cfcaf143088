#include "rstk/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace rstk {

namespace {

using json = nlohmann::json;

double srgb_decode(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double srgb_encode(double v) {
  return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

struct PngRead {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngRead() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWrite {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWrite() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace

Frame::Frame(int w, int h, int c, float fill)
    : width(w), height(h), channels(c) {
  if (w < 1 || h < 1 || c < 1)
    throw std::invalid_argument("Frame: dimensions must be >= 1");
  data.assign(static_cast<std::size_t>(w) * h * c, fill);
}

bool all_finite(const Frame& f) {
  for (float v : f.data)
    if (!std::isfinite(v)) return false;
  return true;
}

void require_valid(const Frame& f, const std::string& what) {
  if (f.width < 1 || f.height < 1 || f.channels < 1)
    throw std::invalid_argument(what + ": dimensions must be >= 1");
  if (f.data.size() !=
      static_cast<std::size_t>(f.width) * f.height * f.channels)
    throw std::invalid_argument(what + ": data length != W*H*C");
  if (!all_finite(f))
    throw std::invalid_argument(what + ": contains NaN or Inf samples");
}

void require_valid(const FrameSequence& seq, const std::string& what) {
  if (seq.count() < 2)
    throw std::invalid_argument(what + ": needs at least 2 frames");
  if (!(seq.dt > 0.0) || !std::isfinite(seq.dt))
    throw std::invalid_argument(what + ": dt must be positive and finite");
  if (!std::isfinite(seq.t0))
    throw std::invalid_argument(what + ": t0 must be finite");
  for (const Frame& f : seq.frames)
    if (!f.same_shape(seq.frames.front()))
      throw std::invalid_argument(what + ": frames differ in dimensions");
}

void require_valid(const ShutterParams& p) {
  if (!std::isfinite(p.t_r) || p.t_r < 0.0)
    throw std::invalid_argument("ShutterParams: t_r must be finite and >= 0");
  if (!std::isfinite(p.t_e) || p.t_e < 0.0)
    throw std::invalid_argument("ShutterParams: t_e must be finite and >= 0");
}

float srgb_to_linear(float v) {
  return static_cast<float>(srgb_decode(static_cast<double>(v)));
}

float linear_to_srgb(float v) {
  return static_cast<float>(srgb_encode(static_cast<double>(v)));
}

Frame load_image(const std::filesystem::path& path, Transfer transfer) {
  PngRead r;
  r.fp = std::fopen(path.string().c_str(), "rb");
  if (!r.fp)
    throw std::runtime_error("load_image: cannot open " + path.string());

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw std::runtime_error("load_image: not a PNG file: " + path.string());

  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  if (!r.png) throw std::runtime_error("load_image: libpng init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw std::runtime_error("load_image: libpng init failed");

  png_uint_32 w = 0, h = 0;
  int bit_depth = 0, color_type = 0;

  if (setjmp(png_jmpbuf(r.png)))
    throw std::runtime_error("load_image: corrupt PNG: " + path.string());
  png_init_io(r.png, r.fp);
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);
  png_get_IHDR(r.png, r.info, &w, &h, &bit_depth, &color_type, nullptr,
               nullptr, nullptr);

  if (bit_depth != 8 && bit_depth != 16)
    throw std::runtime_error("load_image: unsupported bit depth " +
                             std::to_string(bit_depth) + " in " +
                             path.string());
  int channels = 0;
  if (color_type == PNG_COLOR_TYPE_GRAY)
    channels = 1;
  else if (color_type == PNG_COLOR_TYPE_RGB)
    channels = 3;
  else
    throw std::runtime_error(
        "load_image: unsupported channel layout (need gray or RGB): " +
        path.string());

  const int passes = png_set_interlace_handling(r.png);
  (void)passes;
  png_read_update_info(r.png, r.info);

  const std::size_t row_bytes = png_get_rowbytes(r.png, r.info);
  std::vector<png_byte> buffer(row_bytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer.data() + y * row_bytes;

  if (setjmp(png_jmpbuf(r.png)))
    throw std::runtime_error("load_image: corrupt PNG: " + path.string());
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);

  Frame out(static_cast<int>(w), static_cast<int>(h), channels);
  const bool srgb = transfer == Transfer::srgb;
  for (png_uint_32 y = 0; y < h; ++y) {
    const png_bytep row = rows[y];
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * channels; ++i) {
      double v;
      if (bit_depth == 8) {
        v = row[i] / 255.0;
      } else {
        // PNG stores 16-bit samples big-endian
        v = ((row[2 * i] << 8) | row[2 * i + 1]) / 65535.0;
      }
      if (srgb) v = srgb_decode(v);
      out.data[static_cast<std::size_t>(y) * w * channels + i] =
          static_cast<float>(v);
    }
  }
  return out;
}

void save_image(const Frame& frame, const std::filesystem::path& path,
                Transfer transfer, int bit_depth) {
  require_valid(frame, "save_image");
  if (frame.channels != 1 && frame.channels != 3)
    throw std::invalid_argument("save_image: channel count must be 1 or 3");
  if (bit_depth != 8 && bit_depth != 16)
    throw std::invalid_argument("save_image: bit depth must be 8 or 16");

  const int w = frame.width, h = frame.height, c = frame.channels;
  const double maxv = bit_depth == 8 ? 255.0 : 65535.0;
  const bool srgb = transfer == Transfer::srgb;
  const std::size_t bpp = static_cast<std::size_t>(c) * (bit_depth / 8);
  std::vector<png_byte> buffer(bpp * w * h);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = buffer.data() + bpp * w * y;

  for (int y = 0; y < h; ++y) {
    png_bytep row = rows[y];
    for (int i = 0; i < w * c; ++i) {
      double v = frame.data[static_cast<std::size_t>(y) * w * c + i];
      v = std::min(1.0, std::max(0.0, v));
      if (srgb) v = srgb_encode(v);
      const auto q = static_cast<unsigned>(std::lround(v * maxv));
      if (bit_depth == 8) {
        row[i] = static_cast<png_byte>(q);
      } else {
        row[2 * i] = static_cast<png_byte>(q >> 8);
        row[2 * i + 1] = static_cast<png_byte>(q & 0xff);
      }
    }
  }

  PngWrite wr;
  wr.fp = std::fopen(path.string().c_str(), "wb");
  if (!wr.fp)
    throw std::runtime_error("save_image: cannot open " + path.string() +
                             " for writing");
  wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                   nullptr);
  if (!wr.png) throw std::runtime_error("save_image: libpng init failed");
  wr.info = png_create_info_struct(wr.png);
  if (!wr.info) throw std::runtime_error("save_image: libpng init failed");

  if (setjmp(png_jmpbuf(wr.png)))
    throw std::runtime_error("save_image: PNG write failed: " + path.string());
  png_init_io(wr.png, wr.fp);
  // fixed settings keep the encoded bytes reproducible
  png_set_compression_level(wr.png, 6);
  png_set_IHDR(wr.png, wr.info, w, h, bit_depth,
               c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wr.png, wr.info);
  png_write_image(wr.png, rows.data());
  png_write_end(wr.png, nullptr);
}

Frame convert_transfer(const Frame& frame, TransferDirection direction) {
  require_valid(frame, "convert_transfer");
  Frame out(frame.width, frame.height, frame.channels);
  const bool decode = direction == TransferDirection::srgb_to_linear;
  for (std::size_t i = 0; i < frame.data.size(); ++i) {
    const double v = frame.data[i];
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument(
          "convert_transfer: sample out of [0, 1]: " + std::to_string(v));
    out.data[i] = static_cast<float>(decode ? srgb_decode(v) : srgb_encode(v));
  }
  return out;
}

FrameSequence load_sequence_manifest(const std::filesystem::path& path,
                                     Transfer transfer) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("load_sequence_manifest: cannot open " +
                             path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("load_sequence_manifest: bad JSON in " +
                             path.string() + ": " + e.what());
  }
  if (!j.contains("dt_s") || !j.contains("frames"))
    throw std::runtime_error(
        "load_sequence_manifest: manifest needs dt_s and frames");

  FrameSequence seq;
  seq.dt = j.at("dt_s").get<double>();
  seq.t0 = j.value("t0_s", 0.0);
  const auto base = path.parent_path();
  for (const auto& rel : j.at("frames"))
    seq.frames.push_back(load_image(base / rel.get<std::string>(), transfer));
  require_valid(seq, "load_sequence_manifest");
  return seq;
}

}  // namespace rstk
