#pragma once

#include <vector>

#include "rstk/image.hpp"

namespace rstk::warp {

/// Per-pixel displacement (u, v) in pixels, interleaved row-major, one pair
/// per pixel of the frame it applies to. Serializes as an [H, W, 2] tensor.
struct DisplacementField {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  DisplacementField() = default;
  DisplacementField(int w, int h, float u0 = 0.0f, float v0 = 0.0f);

  float& u(int x, int y) {
    return data[2 * (static_cast<std::size_t>(y) * width + x)];
  }
  float u(int x, int y) const {
    return data[2 * (static_cast<std::size_t>(y) * width + x)];
  }
  float& v(int x, int y) {
    return data[2 * (static_cast<std::size_t>(y) * width + x) + 1];
  }
  float v(int x, int y) const {
    return data[2 * (static_cast<std::size_t>(y) * width + x) + 1];
  }
  bool same_shape(const DisplacementField& o) const {
    return width == o.width && height == o.height;
  }
};

void require_valid(const DisplacementField& f, const std::string& what);

/// What a bilinear sample does when its footprint leaves the image: read
/// zeros, or clamp the sample position to the border.
enum class OobMode { zero, clamp };

struct WarpResult {
  Frame frame;
  ValidityMask mask;
};

/// Gather warp: output(q) = bilinear sample of src at q + field(q).
/// mask(q) = 1 where the sample point stays inside the valid bilinear
/// domain [0, W-1] x [0, H-1]; under oob = clamp the values are clamped
/// to the border and the mask is all ones.
WarpResult backward_warp(const Frame& src, const DisplacementField& field,
                         OobMode oob);

struct BackwardWarpGrad {
  Frame d_src;
  DisplacementField d_field;
};

/// Adjoint of backward_warp: given the loss gradient at the warp output,
/// returns gradients with respect to src and field.
BackwardWarpGrad backward_warp_grad(const Frame& src,
                                    const DisplacementField& field,
                                    const Frame& upstream,
                                    OobMode oob = OobMode::zero);

/// Scatter warp: each source pixel p splats src(p) onto the four integer
/// neighbors of p + field(p) with bilinear weights. Targets whose
/// accumulated weight falls below w_min get value 0 and mask 0; elsewhere
/// the value is weight-normalized and mask = min(weight, 1). Accumulation
/// runs in double precision in a fixed row-major order.
WarpResult forward_warp(const Frame& src, const DisplacementField& field,
                        double w_min = 1e-4);

/// Image pyramid, finest first: levels[0] is the input, each following
/// level is 5-tap binomial filtered then 2x decimated, dims ceil(prev/2).
struct Pyramid {
  std::vector<Frame> levels;
};

Pyramid build_pyramid(const Frame& frame, int levels);

/// Bilinear upsampling of a field to roughly doubled dimensions (exactly
/// 2x or 2x-1 per axis), with u scaled by target_w/width and v by
/// target_h/height.
DisplacementField upsample_field(const DisplacementField& field, int target_w,
                                 int target_h);

}  // namespace rstk::warp
