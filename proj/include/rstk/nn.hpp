#pragma once

#include <array>
#include <vector>

#include "rstk/image.hpp"

namespace rstk::nn {

/// Dense k x k cross-correlation weights with symmetric zero padding of
/// k/2. taps laid out [out_channel][in_channel][ky][kx].
struct ConvWeights {
  int out_channels = 0;
  int in_channels = 0;
  int k = 0;
  int stride = 1;
  std::vector<float> taps;

  float tap(int oc, int ic, int ky, int kx) const {
    return taps[((static_cast<std::size_t>(oc) * in_channels + ic) * k + ky) *
                    k +
                kx];
  }
};

void require_valid(const ConvWeights& w);

/// Output spatial dims for a given input under w's stride/padding.
void conv_output_dims(const ConvWeights& w, int in_w, int in_h, int& out_w,
                      int& out_h);

Frame conv2d(const Frame& input, const ConvWeights& w);

/// Per output location, per offset group, per kernel tap: a displacement
/// (dx, dy) in pixels added to the tap's sampling position. Input channels
/// are split into `groups` equal bands, band i using offset set i.
/// data laid out [y][x][group][tap][2].
struct OffsetGrid {
  int width = 0;   // output width
  int height = 0;  // output height
  int k = 0;
  int groups = 1;
  std::vector<float> data;

  std::size_t index(int x, int y, int g, int tap) const {
    return ((((static_cast<std::size_t>(y) * width + x) * groups + g) * k * k) +
            tap) *
           2;
  }
};

OffsetGrid zero_offsets(int width, int height, int k, int groups);
void require_valid(const OffsetGrid& o);

/// Deformable cross-correlation: every tap reads the input at its integer
/// position plus its offset, bilinearly, zero outside. Zero offsets reduce
/// exactly to conv2d.
Frame deform_conv2d(const Frame& input, const ConvWeights& w,
                    const OffsetGrid& offsets);

/// Squeeze-and-excitation weights: C -> C/r dense map, ReLU, C/r -> C
/// dense map, sigmoid gate. No biases.
struct SEWeights {
  int channels = 0;
  int reduced = 0;
  std::vector<float> w1;  // [reduced][channels]
  std::vector<float> w2;  // [channels][reduced]
};

SEWeights make_se_weights(int channels, int reduction = 16);
void require_valid(const SEWeights& w);

/// Channel gating: global average pool, two dense maps with ReLU between,
/// sigmoid, then per-channel multiplication of the input.
Frame se_attention(const Frame& input, const SEWeights& w);

/// Per-channel gate values for the same computation (diagnostic).
std::vector<float> se_gates(const Frame& input, const SEWeights& w);

/// Bilinear reads at arbitrary points (x, y), zero outside bounds.
/// Returns points.size() * C values, point-major.
std::vector<float> bilinear_sample(const Frame& input,
                                   const std::vector<std::array<float, 2>>& points);

struct PointGrad {
  std::vector<float> dx;  // points.size() * C, point-major
  std::vector<float> dy;
};

/// Derivatives of each sampled value with respect to its point coordinates.
PointGrad bilinear_sample_grad(const Frame& input,
                               const std::vector<std::array<float, 2>>& points);

}  // namespace rstk::nn
