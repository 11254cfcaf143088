#pragma once

#include <optional>

#include "rstk/image.hpp"

namespace rstk::metrics {

struct MetricReport {
  double psnr_db = 0.0;  // +infinity when the inputs are identical
  double ssim = 0.0;
  std::optional<double> row_discontinuity;
};

/// 10 * log10(peak^2 / MSE) over all samples and channels; identical
/// inputs return +infinity.
double psnr(const Frame& a, const Frame& b, double peak = 1.0);

/// Mean local structural similarity: 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, dynamic range 1.0, windows fully inside the
/// image, averaged over channels. Needs min dimension >= 11.
double ssim(const Frame& a, const Frame& b);

/// Mean over adjacent row pairs of the mean absolute difference between
/// the two rows. Needs >= 2 rows.
double row_discontinuity(const Frame& frame);

}  // namespace rstk::metrics
