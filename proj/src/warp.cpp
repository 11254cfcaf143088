#include "rstk/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rstk/parallel.hpp"

namespace rstk::warp {

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

void check_pair(const Frame& src, const DisplacementField& field,
                const char* what) {
  require_valid(src, what);
  require_valid(field, what);
  if (src.width != field.width || src.height != field.height)
    throw std::invalid_argument(std::string(what) +
                                ": field dims must match frame dims");
}

constexpr double kBinomial[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16,
                                 1.0 / 16};

}  // namespace

DisplacementField::DisplacementField(int w, int h, float u0, float v0)
    : width(w), height(h) {
  if (w < 1 || h < 1)
    throw std::invalid_argument("DisplacementField: dimensions must be >= 1");
  data.resize(2 * static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < data.size(); i += 2) {
    data[i] = u0;
    data[i + 1] = v0;
  }
}

void require_valid(const DisplacementField& f, const std::string& what) {
  if (f.width < 1 || f.height < 1)
    throw std::invalid_argument(what + ": field dimensions must be >= 1");
  if (f.data.size() != 2 * static_cast<std::size_t>(f.width) * f.height)
    throw std::invalid_argument(what + ": field data length != 2*W*H");
  for (float v : f.data)
    if (!std::isfinite(v))
      throw std::invalid_argument(what + ": field contains NaN or Inf");
}

WarpResult backward_warp(const Frame& src, const DisplacementField& field,
                         OobMode oob) {
  check_pair(src, field, "backward_warp");
  const int w = src.width, h = src.height, c = src.channels;
  WarpResult out{Frame(w, h, c), Frame(w, h, 1)};

  par::for_chunks(static_cast<std::size_t>(h), [&](std::size_t rb,
                                                   std::size_t re) {
    for (std::size_t yy = rb; yy < re; ++yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < w; ++x) {
        double px = x + static_cast<double>(field.u(x, y));
        double py = y + static_cast<double>(field.v(x, y));
        const bool inside =
            px >= 0.0 && px <= w - 1.0 && py >= 0.0 && py <= h - 1.0;
        if (oob == OobMode::clamp) {
          px = std::min(std::max(px, 0.0), w - 1.0);
          py = std::min(std::max(py, 0.0), h - 1.0);
        }
        const int x0 = static_cast<int>(std::floor(px));
        const int y0 = static_cast<int>(std::floor(py));
        const double fx = px - x0, fy = py - y0;
        const double wt[4] = {(1 - fx) * (1 - fy), fx * (1 - fy),
                              (1 - fx) * fy, fx * fy};
        const int tx[4] = {x0, x0 + 1, x0, x0 + 1};
        const int ty[4] = {y0, y0, y0 + 1, y0 + 1};
        for (int ch = 0; ch < c; ++ch) {
          double acc = 0.0;
          for (int t = 0; t < 4; ++t) {
            int xi = tx[t], yi = ty[t];
            if (oob == OobMode::clamp) {
              xi = std::min(std::max(xi, 0), w - 1);
              yi = std::min(std::max(yi, 0), h - 1);
            } else if (xi < 0 || xi >= w || yi < 0 || yi >= h) {
              continue;
            }
            acc += wt[t] * src.at(xi, yi, ch);
          }
          out.frame.at(x, y, ch) = static_cast<float>(acc);
        }
        out.mask.at(x, y, 0) =
            (oob == OobMode::clamp || inside) ? 1.0f : 0.0f;
      }
    }
  });
  return out;
}

BackwardWarpGrad backward_warp_grad(const Frame& src,
                                    const DisplacementField& field,
                                    const Frame& upstream, OobMode oob) {
  check_pair(src, field, "backward_warp_grad");
  require_valid(upstream, "backward_warp_grad");
  if (!upstream.same_shape(src))
    throw std::invalid_argument(
        "backward_warp_grad: upstream dims must match frame dims");

  const int w = src.width, h = src.height, c = src.channels;
  BackwardWarpGrad g{Frame(w, h, c), DisplacementField(w, h)};
  std::vector<double> src_acc(g.d_src.data.size(), 0.0);

  // d_src is a scatter; a single fixed-order pass in double keeps it
  // deterministic and free of running-sum rounding.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double px = x + static_cast<double>(field.u(x, y));
      double py = y + static_cast<double>(field.v(x, y));
      bool dead_x = false, dead_y = false;
      if (oob == OobMode::clamp) {
        // clamped coordinates stop responding to the field
        if (px <= 0.0 || px >= w - 1.0) dead_x = true;
        if (py <= 0.0 || py >= h - 1.0) dead_y = true;
        px = std::min(std::max(px, 0.0), w - 1.0);
        py = std::min(std::max(py, 0.0), h - 1.0);
      }
      const int x0 = static_cast<int>(std::floor(px));
      const int y0 = static_cast<int>(std::floor(py));
      const double fx = px - x0, fy = py - y0;
      const double wt[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy,
                            fx * fy};
      const int tx[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ty[4] = {y0, y0, y0 + 1, y0 + 1};

      double du = 0.0, dv = 0.0;
      for (int ch = 0; ch < c; ++ch) {
        const double up = upstream.at(x, y, ch);
        double v[4] = {0.0, 0.0, 0.0, 0.0};
        for (int t = 0; t < 4; ++t) {
          int xi = tx[t], yi = ty[t];
          if (oob == OobMode::clamp) {
            xi = std::min(std::max(xi, 0), w - 1);
            yi = std::min(std::max(yi, 0), h - 1);
          } else if (xi < 0 || xi >= w || yi < 0 || yi >= h) {
            continue;
          }
          v[t] = src.at(xi, yi, ch);
          src_acc[(static_cast<std::size_t>(yi) * w + xi) * c + ch] +=
              wt[t] * up;
        }
        if (!dead_x) du += up * ((1 - fy) * (v[1] - v[0]) + fy * (v[3] - v[2]));
        if (!dead_y) dv += up * ((1 - fx) * (v[2] - v[0]) + fx * (v[3] - v[1]));
      }
      g.d_field.u(x, y) = static_cast<float>(du);
      g.d_field.v(x, y) = static_cast<float>(dv);
    }
  }
  for (std::size_t i = 0; i < src_acc.size(); ++i)
    g.d_src.data[i] = static_cast<float>(src_acc[i]);
  return g;
}

WarpResult forward_warp(const Frame& src, const DisplacementField& field,
                        double w_min) {
  check_pair(src, field, "forward_warp");
  if (!(w_min > 0.0))
    throw std::invalid_argument("forward_warp: w_min must be > 0");

  const int w = src.width, h = src.height, c = src.channels;
  const std::size_t npix = static_cast<std::size_t>(w) * h;
  std::vector<double> acc_w(npix, 0.0);
  std::vector<double> acc_v(npix * c, 0.0);

  // Scatter with collisions: a single fixed row-major pass in double keeps
  // the result independent of thread count.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double tx = x + static_cast<double>(field.u(x, y));
      const double ty = y + static_cast<double>(field.v(x, y));
      const int x0 = static_cast<int>(std::floor(tx));
      const int y0 = static_cast<int>(std::floor(ty));
      const double fx = tx - x0, fy = ty - y0;
      const double wt[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy,
                            fx * fy};
      const int px[4] = {x0, x0 + 1, x0, x0 + 1};
      const int py[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int t = 0; t < 4; ++t) {
        if (px[t] < 0 || px[t] >= w || py[t] < 0 || py[t] >= h) continue;
        const std::size_t idx = static_cast<std::size_t>(py[t]) * w + px[t];
        acc_w[idx] += wt[t];
        for (int ch = 0; ch < c; ++ch)
          acc_v[idx * c + ch] += wt[t] * src.at(x, y, ch);
      }
    }
  }

  WarpResult out{Frame(w, h, c), Frame(w, h, 1)};
  par::for_chunks(npix, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (acc_w[i] >= w_min) {
        for (int ch = 0; ch < c; ++ch)
          out.frame.data[i * c + ch] =
              static_cast<float>(acc_v[i * c + ch] / acc_w[i]);
        out.mask.data[i] = static_cast<float>(std::min(acc_w[i], 1.0));
      }
    }
  });
  return out;
}

Pyramid build_pyramid(const Frame& frame, int levels) {
  require_valid(frame, "build_pyramid");
  if (levels < 1)
    throw std::invalid_argument("build_pyramid: levels must be >= 1");
  const int need = 1 << (levels - 1);
  if (frame.width < need || frame.height < need)
    throw std::invalid_argument(
        "build_pyramid: frame too small for " + std::to_string(levels) +
        " levels (needs >= " + std::to_string(need) + " px per side)");

  Pyramid pyr;
  pyr.levels.push_back(frame);
  for (int s = 1; s < levels; ++s) {
    const Frame& prev = pyr.levels.back();
    const int pw = prev.width, ph = prev.height, c = prev.channels;
    const int nw = (pw + 1) / 2, nh = (ph + 1) / 2;

    // horizontal binomial at even columns, then vertical at even rows
    std::vector<double> tmp(static_cast<std::size_t>(ph) * nw * c);
    par::for_chunks(static_cast<std::size_t>(ph),
                    [&](std::size_t b, std::size_t e) {
                      for (std::size_t y = b; y < e; ++y)
                        for (int xo = 0; xo < nw; ++xo)
                          for (int ch = 0; ch < c; ++ch) {
                            double acc = 0.0;
                            for (int k = 0; k < 5; ++k) {
                              const int xi = reflect101(2 * xo + k - 2, pw);
                              acc += kBinomial[k] *
                                     prev.at(xi, static_cast<int>(y), ch);
                            }
                            tmp[(y * nw + xo) * c + ch] = acc;
                          }
                    });

    Frame next(nw, nh, c);
    par::for_chunks(static_cast<std::size_t>(nh),
                    [&](std::size_t b, std::size_t e) {
                      for (std::size_t yo = b; yo < e; ++yo)
                        for (int xo = 0; xo < nw; ++xo)
                          for (int ch = 0; ch < c; ++ch) {
                            double acc = 0.0;
                            for (int k = 0; k < 5; ++k) {
                              const int yi = reflect101(
                                  2 * static_cast<int>(yo) + k - 2, ph);
                              acc += kBinomial[k] *
                                     tmp[(static_cast<std::size_t>(yi) * nw +
                                          xo) *
                                             c +
                                         ch];
                            }
                            next.at(xo, static_cast<int>(yo), ch) =
                                static_cast<float>(acc);
                          }
                    });
    pyr.levels.push_back(std::move(next));
  }
  return pyr;
}

DisplacementField upsample_field(const DisplacementField& field, int target_w,
                                 int target_h) {
  require_valid(field, "upsample_field");
  const int sw = field.width, sh = field.height;
  if (target_w < sw || target_h < sh)
    throw std::invalid_argument("upsample_field: shrinking not supported");
  if ((target_w != 2 * sw && target_w != 2 * sw - 1) ||
      (target_h != 2 * sh && target_h != 2 * sh - 1))
    throw std::invalid_argument(
        "upsample_field: target must be 2x source within rounding");

  const double scale_x = static_cast<double>(target_w) / sw;
  const double scale_y = static_cast<double>(target_h) / sh;
  DisplacementField out(target_w, target_h);
  par::for_chunks(static_cast<std::size_t>(target_h), [&](std::size_t b,
                                                          std::size_t e) {
    for (std::size_t yy = b; yy < e; ++yy) {
      const int y = static_cast<int>(yy);
      const double py = std::min(y / scale_y, sh - 1.0);
      const int y0 = static_cast<int>(std::floor(py));
      const int y1 = std::min(y0 + 1, sh - 1);
      const double fy = py - y0;
      for (int x = 0; x < target_w; ++x) {
        const double px = std::min(x / scale_x, sw - 1.0);
        const int x0 = static_cast<int>(std::floor(px));
        const int x1 = std::min(x0 + 1, sw - 1);
        const double fx = px - x0;
        const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy);
        const double w01 = (1 - fx) * fy, w11 = fx * fy;
        const double u = w00 * field.u(x0, y0) + w10 * field.u(x1, y0) +
                         w01 * field.u(x0, y1) + w11 * field.u(x1, y1);
        const double v = w00 * field.v(x0, y0) + w10 * field.v(x1, y0) +
                         w01 * field.v(x0, y1) + w11 * field.v(x1, y1);
        out.u(x, y) = static_cast<float>(u * scale_x);
        out.v(x, y) = static_cast<float>(v * scale_y);
      }
    }
  });
  return out;
}

}  // namespace rstk::warp
