#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "rstk/image.hpp"
#include "rstk/warp.hpp"

namespace rstk::calib {

/// 3x3 projective map, row-major, normalized so m[8] = 1.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  std::array<double, 2> apply(double x, double y) const;
  Homography inverse() const;
};

struct PointPair {
  double sx, sy;  // source
  double tx, ty;  // target
};
using Correspondences = std::vector<PointPair>;

/// Reads a correspondences CSV with header sx,sy,tx,ty.
Correspondences load_correspondences_csv(const std::filesystem::path& path);

struct HomographyFit {
  Homography h;
  double rms = 0.0;  // RMS symmetric transfer error, pixels
};

/// Hartley-normalized DLT followed by Levenberg-Marquardt refinement of
/// the symmetric transfer error. Needs >= 4 non-degenerate pairs.
HomographyFit estimate_homography(const Correspondences& c);

/// Inverse-map resampling: each output pixel is pulled from H^{-1} applied
/// to its own coordinates, bilinearly.
Frame apply_homography(const Frame& frame, const Homography& h,
                       warp::OobMode oob);

using Rgb = std::array<double, 3>;

struct ColorMatrixFit {
  std::array<double, 9> m{};  // row-major 3x3
  double rms = 0.0;           // RMS per-channel residual
};

/// Least-squares 3x3 map taking measured patch colors to reference colors.
/// Needs >= 3 patches spanning full rank.
ColorMatrixFit estimate_color_matrix(const std::vector<Rgb>& measured,
                                     const std::vector<Rgb>& reference);

}  // namespace rstk::calib
