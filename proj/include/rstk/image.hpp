#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace rstk {

/// W x H x C grid of 32-bit float samples, row-major with interleaved
/// channels, linear intensity nominally in [0, 1]. Also used for feature
/// grids (arbitrary channel count) and single-channel weight planes.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  Frame() = default;
  Frame(int w, int h, int c, float fill = 0.0f);

  float& at(int x, int y, int ch) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
  float at(int x, int y, int ch) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }

  std::size_t sample_count() const { return data.size(); }
  bool same_shape(const Frame& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Single-channel per-pixel weight plane in [0, 1]; 0 marks holes.
using ValidityMask = Frame;

/// Throws std::invalid_argument if dims are inconsistent or any sample is
/// NaN/Inf.
void require_valid(const Frame& f, const std::string& what);
bool all_finite(const Frame& f);

/// Uniformly timed ordered frames; frame k is the instantaneous scene at
/// t0 + k * dt.
struct FrameSequence {
  std::vector<Frame> frames;
  double dt = 0.0;  // seconds per frame interval
  double t0 = 0.0;  // timestamp of frame 0, seconds

  int count() const { return static_cast<int>(frames.size()); }
  double time_of(int k) const { return t0 + k * dt; }
  double end_time() const { return t0 + (count() - 1) * dt; }
};

/// Throws std::invalid_argument unless the sequence has >= 2
/// dimension-identical frames and a positive finite dt.
void require_valid(const FrameSequence& seq, const std::string& what);

/// Rolling-shutter timing. t_r is the per-row readout offset, t_e the
/// exposure duration. The mid-frame offset t_m = (M/2) * t_r is always
/// derived from the row count, never stored.
struct ShutterParams {
  double t_r = 0.0;  // seconds per row
  double t_e = 0.0;  // seconds of exposure

  double mid_offset(int rows) const { return 0.5 * rows * t_r; }
};

void require_valid(const ShutterParams& p);

enum class Transfer { srgb, linear };
enum class TransferDirection { srgb_to_linear, linear_to_srgb };

/// Scalar sRGB transfer, defined on [0, 1].
float srgb_to_linear(float v);
float linear_to_srgb(float v);

/// Loads an 8- or 16-bit grayscale/RGB PNG. Samples are scaled to [0, 1];
/// with transfer = srgb they are additionally decoded to linear light.
Frame load_image(const std::filesystem::path& path, Transfer transfer);

/// Writes a PNG at the requested bit depth (8 or 16). Samples are clamped
/// to [0, 1]; with transfer = srgb they are encoded before quantization.
/// Requires 1 or 3 channels and finite samples.
void save_image(const Frame& frame, const std::filesystem::path& path,
                Transfer transfer, int bit_depth);

/// Elementwise sRGB conversion. Inputs must lie in [0, 1]; out-of-range or
/// non-finite samples are rejected, not clamped.
Frame convert_transfer(const Frame& frame, TransferDirection direction);

/// Loads a sequence manifest: JSON {"dt_s": ..., "t0_s": ..., "frames":
/// [relative paths...]}, frames decoded in listed order.
FrameSequence load_sequence_manifest(const std::filesystem::path& path,
                                     Transfer transfer);

}  // namespace rstk
