#include "rstk/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rstk/parallel.hpp"

namespace rstk::nn {

namespace {

double bilinear_zero(const Frame& f, double px, double py, int ch) {
  const int x0 = static_cast<int>(std::floor(px));
  const int y0 = static_cast<int>(std::floor(py));
  const double fx = px - x0, fy = py - y0;
  const double wt[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy,
                        fx * fy};
  const int tx[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ty[4] = {y0, y0, y0 + 1, y0 + 1};
  double acc = 0.0;
  for (int t = 0; t < 4; ++t) {
    if (tx[t] < 0 || tx[t] >= f.width || ty[t] < 0 || ty[t] >= f.height)
      continue;
    acc += wt[t] * f.at(tx[t], ty[t], ch);
  }
  return acc;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void require_valid(const ConvWeights& w) {
  if (w.out_channels < 1 || w.in_channels < 1)
    throw std::invalid_argument("ConvWeights: channel counts must be >= 1");
  if (w.k < 1 || w.k % 2 == 0)
    throw std::invalid_argument("ConvWeights: kernel size must be odd");
  if (w.stride < 1)
    throw std::invalid_argument("ConvWeights: stride must be >= 1");
  const std::size_t need = static_cast<std::size_t>(w.out_channels) *
                           w.in_channels * w.k * w.k;
  if (w.taps.size() != need)
    throw std::invalid_argument("ConvWeights: tap count mismatch");
  for (float t : w.taps)
    if (!std::isfinite(t))
      throw std::invalid_argument("ConvWeights: non-finite tap");
}

void conv_output_dims(const ConvWeights& w, int in_w, int in_h, int& out_w,
                      int& out_h) {
  const int pad = w.k / 2;
  out_w = (in_w + 2 * pad - w.k) / w.stride + 1;
  out_h = (in_h + 2 * pad - w.k) / w.stride + 1;
  if (out_w < 1 || out_h < 1)
    throw std::invalid_argument("conv2d: input smaller than stride footprint");
}

Frame conv2d(const Frame& input, const ConvWeights& w) {
  require_valid(input, "conv2d");
  require_valid(w);
  if (input.channels != w.in_channels)
    throw std::invalid_argument("conv2d: input channel count mismatch");

  int ow = 0, oh = 0;
  conv_output_dims(w, input.width, input.height, ow, oh);
  const int pad = w.k / 2;
  Frame out(ow, oh, w.out_channels);
  par::for_chunks(static_cast<std::size_t>(oh), [&](std::size_t b,
                                                    std::size_t e) {
    for (std::size_t yy = b; yy < e; ++yy) {
      const int oy = static_cast<int>(yy);
      for (int ox = 0; ox < ow; ++ox)
        for (int oc = 0; oc < w.out_channels; ++oc) {
          double acc = 0.0;
          for (int ic = 0; ic < w.in_channels; ++ic)
            for (int ky = 0; ky < w.k; ++ky)
              for (int kx = 0; kx < w.k; ++kx) {
                const int ix = ox * w.stride - pad + kx;
                const int iy = oy * w.stride - pad + ky;
                if (ix < 0 || ix >= input.width || iy < 0 ||
                    iy >= input.height)
                  continue;
                acc += static_cast<double>(w.tap(oc, ic, ky, kx)) *
                       input.at(ix, iy, ic);
              }
          out.at(ox, oy, oc) = static_cast<float>(acc);
        }
    }
  });
  return out;
}

OffsetGrid zero_offsets(int width, int height, int k, int groups) {
  OffsetGrid o;
  o.width = width;
  o.height = height;
  o.k = k;
  o.groups = groups;
  o.data.assign(static_cast<std::size_t>(width) * height * groups * k * k * 2,
                0.0f);
  return o;
}

void require_valid(const OffsetGrid& o) {
  if (o.width < 1 || o.height < 1 || o.k < 1 || o.groups < 1)
    throw std::invalid_argument("OffsetGrid: bad dimensions");
  const std::size_t need =
      static_cast<std::size_t>(o.width) * o.height * o.groups * o.k * o.k * 2;
  if (o.data.size() != need)
    throw std::invalid_argument("OffsetGrid: data length mismatch");
  for (float v : o.data)
    if (!std::isfinite(v))
      throw std::invalid_argument("OffsetGrid: non-finite offset");
}

Frame deform_conv2d(const Frame& input, const ConvWeights& w,
                    const OffsetGrid& offsets) {
  require_valid(input, "deform_conv2d");
  require_valid(w);
  require_valid(offsets);
  if (input.channels != w.in_channels)
    throw std::invalid_argument("deform_conv2d: input channel count mismatch");
  if (w.in_channels % offsets.groups != 0)
    throw std::invalid_argument(
        "deform_conv2d: groups must divide input channels");
  if (offsets.k != w.k)
    throw std::invalid_argument("deform_conv2d: offset grid kernel mismatch");

  int ow = 0, oh = 0;
  conv_output_dims(w, input.width, input.height, ow, oh);
  if (offsets.width != ow || offsets.height != oh)
    throw std::invalid_argument(
        "deform_conv2d: offset grid dims must match output dims");

  const int pad = w.k / 2;
  const int band = w.in_channels / offsets.groups;
  Frame out(ow, oh, w.out_channels);
  par::for_chunks(static_cast<std::size_t>(oh), [&](std::size_t b,
                                                    std::size_t e) {
    for (std::size_t yy = b; yy < e; ++yy) {
      const int oy = static_cast<int>(yy);
      for (int ox = 0; ox < ow; ++ox)
        for (int oc = 0; oc < w.out_channels; ++oc) {
          double acc = 0.0;
          for (int ic = 0; ic < w.in_channels; ++ic) {
            const int g = ic / band;
            for (int ky = 0; ky < w.k; ++ky)
              for (int kx = 0; kx < w.k; ++kx) {
                const std::size_t oi =
                    offsets.index(ox, oy, g, ky * w.k + kx);
                const double px =
                    ox * w.stride - pad + kx + offsets.data[oi];
                const double py =
                    oy * w.stride - pad + ky + offsets.data[oi + 1];
                acc += static_cast<double>(w.tap(oc, ic, ky, kx)) *
                       bilinear_zero(input, px, py, ic);
              }
          }
          out.at(ox, oy, oc) = static_cast<float>(acc);
        }
    }
  });
  return out;
}

SEWeights make_se_weights(int channels, int reduction) {
  if (channels < 1 || reduction < 1 || channels / reduction < 1)
    throw std::invalid_argument(
        "make_se_weights: need channels >= reduction >= 1");
  SEWeights w;
  w.channels = channels;
  w.reduced = channels / reduction;
  w.w1.assign(static_cast<std::size_t>(w.reduced) * channels, 0.0f);
  w.w2.assign(static_cast<std::size_t>(channels) * w.reduced, 0.0f);
  return w;
}

void require_valid(const SEWeights& w) {
  if (w.channels < 1 || w.reduced < 1)
    throw std::invalid_argument("SEWeights: channel counts must be >= 1");
  if (w.w1.size() != static_cast<std::size_t>(w.reduced) * w.channels ||
      w.w2.size() != static_cast<std::size_t>(w.channels) * w.reduced)
    throw std::invalid_argument("SEWeights: weight map size mismatch");
  for (const auto* m : {&w.w1, &w.w2})
    for (float v : *m)
      if (!std::isfinite(v))
        throw std::invalid_argument("SEWeights: non-finite weight");
}

std::vector<float> se_gates(const Frame& input, const SEWeights& w) {
  require_valid(input, "se_attention");
  require_valid(w);
  if (input.channels != w.channels)
    throw std::invalid_argument("se_attention: channel count mismatch");

  const std::size_t npix = static_cast<std::size_t>(input.width) * input.height;
  std::vector<double> pool(w.channels, 0.0);
  for (std::size_t i = 0; i < npix; ++i)
    for (int c = 0; c < w.channels; ++c)
      pool[c] += input.data[i * w.channels + c];
  for (double& p : pool) p /= static_cast<double>(npix);

  std::vector<double> hidden(w.reduced, 0.0);
  for (int j = 0; j < w.reduced; ++j) {
    double acc = 0.0;
    for (int c = 0; c < w.channels; ++c)
      acc += static_cast<double>(w.w1[static_cast<std::size_t>(j) * w.channels +
                                      c]) *
             pool[c];
    hidden[j] = std::max(acc, 0.0);
  }

  std::vector<float> gates(w.channels);
  for (int c = 0; c < w.channels; ++c) {
    double acc = 0.0;
    for (int j = 0; j < w.reduced; ++j)
      acc += static_cast<double>(
                 w.w2[static_cast<std::size_t>(c) * w.reduced + j]) *
             hidden[j];
    gates[c] = static_cast<float>(sigmoid(acc));
  }
  return gates;
}

Frame se_attention(const Frame& input, const SEWeights& w) {
  const std::vector<float> gates = se_gates(input, w);
  Frame out(input.width, input.height, input.channels);
  par::for_chunks(
      static_cast<std::size_t>(input.width) * input.height,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
          for (int c = 0; c < input.channels; ++c)
            out.data[i * input.channels + c] = static_cast<float>(
                static_cast<double>(gates[c]) *
                input.data[i * input.channels + c]);
      });
  return out;
}

std::vector<float> bilinear_sample(
    const Frame& input, const std::vector<std::array<float, 2>>& points) {
  require_valid(input, "bilinear_sample");
  std::vector<float> out(points.size() * input.channels);
  for (std::size_t p = 0; p < points.size(); ++p)
    for (int c = 0; c < input.channels; ++c)
      out[p * input.channels + c] = static_cast<float>(
          bilinear_zero(input, points[p][0], points[p][1], c));
  return out;
}

PointGrad bilinear_sample_grad(
    const Frame& input, const std::vector<std::array<float, 2>>& points) {
  require_valid(input, "bilinear_sample_grad");
  PointGrad g;
  g.dx.resize(points.size() * input.channels);
  g.dy.resize(points.size() * input.channels);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double px = points[p][0], py = points[p][1];
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const double fx = px - x0, fy = py - y0;
    for (int c = 0; c < input.channels; ++c) {
      double v[4] = {0, 0, 0, 0};
      const int tx[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ty[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int t = 0; t < 4; ++t)
        if (tx[t] >= 0 && tx[t] < input.width && ty[t] >= 0 &&
            ty[t] < input.height)
          v[t] = input.at(tx[t], ty[t], c);
      g.dx[p * input.channels + c] =
          static_cast<float>((1 - fy) * (v[1] - v[0]) + fy * (v[3] - v[2]));
      g.dy[p * input.channels + c] =
          static_cast<float>((1 - fx) * (v[2] - v[0]) + fx * (v[3] - v[1]));
    }
  }
  return g;
}

}  // namespace rstk::nn
