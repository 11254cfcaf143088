#pragma once

#include <vector>

namespace rstk::ref {

// Naive double-precision reference implementations used only by tests as
// oracles. They share no code with the production kernels; layouts match
// the production structs so tests can compare outputs directly.

/// Bilinear read of an interleaved w*h*c image, zero outside bounds.
double bilinear_at(const std::vector<double>& img, int w, int h, int c,
                   double x, double y, int ch);

/// Gather warp: out(q) = bilinear(src, q + field(q)). clamp=true clamps
/// sample positions (and taps) to the border instead of reading zeros.
std::vector<double> warp_gather(const std::vector<double>& src, int w, int h,
                                int c, const std::vector<double>& field,
                                bool clamp);

double charbonnier_sum(const std::vector<double>& r, double eps);

/// Charbonnier-smoothed anisotropic TV over forward differences of the
/// interleaved (u, v) field.
double tv_sum(const std::vector<double>& field, int w, int h, double eps);

/// lambda_c * charbonnier(warp_gather(a, field, clamp) - b)
/// + lambda_tv * tv(field); the double-precision twin of the solver
/// objective, for finite-difference checks.
double flow_objective(const std::vector<double>& a,
                      const std::vector<double>& b, int w, int h, int c,
                      const std::vector<double>& field, double lambda_c,
                      double lambda_tv, double eps);

/// Six-nested-loop cross-correlation, zero padding k/2, taps laid out
/// [out_c][in_c][ky][kx].
std::vector<double> conv2d(const std::vector<double>& input, int w, int h,
                           int c_in, const std::vector<double>& taps,
                           int c_out, int k, int stride);

/// Per-tap bilinear-gather deformable variant; offsets laid out
/// [y][x][group][tap][2] over the output grid.
std::vector<double> deform_conv2d(const std::vector<double>& input, int w,
                                  int h, int c_in,
                                  const std::vector<double>& taps, int c_out,
                                  int k, int stride,
                                  const std::vector<double>& offsets,
                                  int groups);

/// Pool -> dense -> ReLU -> dense -> sigmoid -> gate.
std::vector<double> se_attention(const std::vector<double>& input, int w,
                                 int h, int c,
                                 const std::vector<double>& w1, int reduced,
                                 const std::vector<double>& w2);

/// Scalar sRGB decode, written out directly from the piecewise definition.
double srgb_decode(double v);

/// Closed-form SSIM of two constant images (variances vanish).
double ssim_constant(double a, double b);

}  // namespace rstk::ref
