#include "rstk/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rstk/parallel.hpp"

namespace rstk::metrics {

namespace {

constexpr int kWin = 11;
constexpr int kRad = kWin / 2;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kRange = 1.0;

void check_pair(const Frame& a, const Frame& b, const char* what) {
  require_valid(a, what);
  require_valid(b, what);
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) +
                                ": frames must match in dimensions");
}

struct GaussianWindow {
  double w[kWin][kWin];
  GaussianWindow() {
    double total = 0.0;
    for (int y = 0; y < kWin; ++y)
      for (int x = 0; x < kWin; ++x) {
        const double dx = x - kRad, dy = y - kRad;
        w[y][x] = std::exp(-(dx * dx + dy * dy) / (2 * kSigma * kSigma));
        total += w[y][x];
      }
    for (int y = 0; y < kWin; ++y)
      for (int x = 0; x < kWin; ++x) w[y][x] /= total;
  }
};

const GaussianWindow& gaussian() {
  static const GaussianWindow g;
  return g;
}

}  // namespace

double psnr(const Frame& a, const Frame& b, double peak) {
  check_pair(a, b, "psnr");
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be > 0");

  const double sq =
      par::sum_chunks(a.data.size(), [&](std::size_t s, std::size_t e) {
        double acc = 0.0;
        for (std::size_t i = s; i < e; ++i) {
          const double d =
              static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
          acc += d * d;
        }
        return acc;
      });
  const double mse = sq / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Frame& a, const Frame& b) {
  check_pair(a, b, "ssim");
  if (a.width < kWin || a.height < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  const double c1 = (kK1 * kRange) * (kK1 * kRange);
  const double c2 = (kK2 * kRange) * (kK2 * kRange);
  const GaussianWindow& g = gaussian();
  const int xs = kRad, xe = a.width - kRad;   // valid window centers
  const int ys = kRad, ye = a.height - kRad;
  const std::size_t n_centers =
      static_cast<std::size_t>(xe - xs) * (ye - ys) * a.channels;

  const double total = par::sum_chunks(
      static_cast<std::size_t>(ye - ys), [&](std::size_t s, std::size_t e) {
        double acc = 0.0;
        for (std::size_t row = s; row < e; ++row) {
          const int cy = ys + static_cast<int>(row);
          for (int cx = xs; cx < xe; ++cx)
            for (int ch = 0; ch < a.channels; ++ch) {
              double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
              for (int wy = 0; wy < kWin; ++wy)
                for (int wx = 0; wx < kWin; ++wx) {
                  const double wgt = g.w[wy][wx];
                  const double va = a.at(cx + wx - kRad, cy + wy - kRad, ch);
                  const double vb = b.at(cx + wx - kRad, cy + wy - kRad, ch);
                  ma += wgt * va;
                  mb += wgt * vb;
                  saa += wgt * va * va;
                  sbb += wgt * vb * vb;
                  sab += wgt * va * vb;
                }
              const double var_a = saa - ma * ma;
              const double var_b = sbb - mb * mb;
              const double cov = sab - ma * mb;
              acc += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            }
        }
        return acc;
      });
  return total / static_cast<double>(n_centers);
}

double row_discontinuity(const Frame& frame) {
  require_valid(frame, "row_discontinuity");
  if (frame.height < 2)
    throw std::invalid_argument("row_discontinuity: needs >= 2 rows");

  const std::size_t row_samples =
      static_cast<std::size_t>(frame.width) * frame.channels;
  const double total = par::sum_chunks(
      static_cast<std::size_t>(frame.height - 1),
      [&](std::size_t s, std::size_t e) {
        double acc = 0.0;
        for (std::size_t i = s; i < e; ++i) {
          const float* r0 = frame.data.data() + i * row_samples;
          const float* r1 = r0 + row_samples;
          double row_acc = 0.0;
          for (std::size_t j = 0; j < row_samples; ++j)
            row_acc += std::abs(static_cast<double>(r1[j]) -
                                static_cast<double>(r0[j]));
          acc += row_acc / static_cast<double>(row_samples);
        }
        return acc;
      });
  return total / static_cast<double>(frame.height - 1);
}

}  // namespace rstk::metrics
