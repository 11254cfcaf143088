#include "rstk/formation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstk/parallel.hpp"

namespace rstk::formation {

namespace {

// Absolute slack for time-range checks so boundary times that round a few
// ulps past an endpoint are not rejected. Far below any sane dt.
double range_slack(const FrameSequence& seq) {
  return 1e-9 * std::max({1.0, std::abs(seq.t0), std::abs(seq.end_time())});
}

void check_time(const FrameSequence& seq, double tau, const char* what,
                int row) {
  const double slack = range_slack(seq);
  if (tau >= seq.t0 - slack && tau <= seq.end_time() + slack) return;
  std::string msg = std::string(what) + ": time " + std::to_string(tau) +
                    " outside sequence range [" + std::to_string(seq.t0) +
                    ", " + std::to_string(seq.end_time()) + "]";
  if (row >= 0) msg += " (row " + std::to_string(row) + ")";
  throw std::domain_error(msg);
}

// Bracketing frames and blend weight for one reconstruction instant:
// value = f[k0] + a * (f[k1] - f[k0]).
struct TimePoint {
  int k0;
  int k1;
  double a;
};

TimePoint locate(const FrameSequence& seq, double tau, bool rowcopy) {
  const int n = seq.count();
  double x = (tau - seq.t0) / seq.dt;
  x = std::min(std::max(x, 0.0), static_cast<double>(n - 1));
  if (rowcopy) {
    // nearest frame, ties toward the earlier one
    const int k = static_cast<int>(std::ceil(x - 0.5));
    return {k, k, 0.0};
  }
  int k0 = static_cast<int>(std::floor(x));
  double a = x - k0;
  if (k0 >= n - 1) {
    k0 = n - 1;
    a = 0.0;
  }
  return {k0, a == 0.0 ? k0 : k0 + 1, a};
}

void blend_row(const FrameSequence& seq, const TimePoint& tp, int row,
               float* out) {
  const Frame& f0 = seq.frames[tp.k0];
  const std::size_t n = static_cast<std::size_t>(f0.width) * f0.channels;
  const std::size_t base = static_cast<std::size_t>(row) * n;
  if (tp.k0 == tp.k1) {
    std::copy_n(f0.data.data() + base, n, out);
    return;
  }
  const Frame& f1 = seq.frames[tp.k1];
  for (std::size_t i = 0; i < n; ++i) {
    const double v0 = f0.data[base + i];
    const double v1 = f1.data[base + i];
    out[i] = static_cast<float>(v0 + tp.a * (v1 - v0));
  }
}

void accumulate_row(const FrameSequence& seq, const TimePoint& tp, int row,
                    double* acc) {
  const Frame& f0 = seq.frames[tp.k0];
  const std::size_t n = static_cast<std::size_t>(f0.width) * f0.channels;
  const std::size_t base = static_cast<std::size_t>(row) * n;
  if (tp.k0 == tp.k1) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += f0.data[base + i];
    return;
  }
  const Frame& f1 = seq.frames[tp.k1];
  for (std::size_t i = 0; i < n; ++i) {
    const double v0 = f0.data[base + i];
    const double v1 = f1.data[base + i];
    acc[i] += v0 + tp.a * (v1 - v0);
  }
}

// Instantaneous capture. Row i is the scene at t - t_m + i * t_r; both
// sample_gs (t_m = t_r = 0) and simulate_rs run through here so their
// outputs agree exactly where the contracts say they must.
Frame rs_capture(const FrameSequence& seq, double t, double t_m, double t_r,
                 const SynthesisMode& mode, const char* what) {
  const Frame& ref = seq.frames.front();
  const int rows = ref.height;
  for (int i = 0; i < rows; ++i)
    check_time(seq, t - t_m + i * t_r, what, t_r == 0.0 ? -1 : i);

  const bool rowcopy = mode.kind == SynthesisMode::Kind::rowcopy;
  Frame out(ref.width, ref.height, ref.channels);
  const std::size_t stride = static_cast<std::size_t>(ref.width) * ref.channels;
  par::for_chunks(static_cast<std::size_t>(rows),
                  [&](std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      const TimePoint tp =
                          locate(seq, t - t_m + static_cast<double>(i) * t_r,
                                 rowcopy);
                      blend_row(seq, tp, static_cast<int>(i),
                                out.data.data() + i * stride);
                    }
                  });
  return out;
}

// Exposure capture. Row i is the mean of S reconstruction instants spanning
// the window of width t_e centered at t - t_m + i * t_r; simulate_gs_blur
// (t_m = t_r = 0) and simulate_rscd share this path.
Frame windowed_capture(const FrameSequence& seq, double t, double t_m,
                       double t_r, double t_e, const SynthesisMode& mode,
                       const char* what) {
  const int s = mode.samples_per_window;
  if (s < 2)
    throw std::invalid_argument(std::string(what) +
                                ": samples_per_window must be >= 2");
  const Frame& ref = seq.frames.front();
  const int rows = ref.height;
  for (int i = 0; i < rows; ++i) {
    const double center = t - t_m + i * t_r;
    const int report = t_r == 0.0 ? -1 : i;
    check_time(seq, center - 0.5 * t_e, what, report);
    check_time(seq, center + 0.5 * t_e, what, report);
  }

  const bool rowcopy = mode.kind == SynthesisMode::Kind::rowcopy;
  const double step = t_e / (s - 1);
  Frame out(ref.width, ref.height, ref.channels);
  const std::size_t stride = static_cast<std::size_t>(ref.width) * ref.channels;
  par::for_chunks(
      static_cast<std::size_t>(rows), [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(stride);
        for (std::size_t i = begin; i < end; ++i) {
          const double center = t - t_m + static_cast<double>(i) * t_r;
          std::fill(acc.begin(), acc.end(), 0.0);
          for (int k = 0; k < s; ++k) {
            const double tau = center - 0.5 * t_e + k * step;
            accumulate_row(seq, locate(seq, tau, rowcopy),
                           static_cast<int>(i), acc.data());
          }
          float* dst = out.data.data() + i * stride;
          for (std::size_t j = 0; j < stride; ++j)
            dst[j] = static_cast<float>(acc[j] / s);
        }
      });
  return out;
}

}  // namespace

SynthesisMode interpolate_mode(int samples_per_window) {
  return {SynthesisMode::Kind::interpolate, samples_per_window};
}

SynthesisMode rowcopy_mode() { return {SynthesisMode::Kind::rowcopy, 16}; }

Frame sample_gs(const FrameSequence& seq, double tau,
                const SynthesisMode& mode) {
  require_valid(seq, "sample_gs");
  return rs_capture(seq, tau, 0.0, 0.0, mode, "sample_gs");
}

Frame simulate_rs(const FrameSequence& seq, double t,
                  const ShutterParams& shutter, const SynthesisMode& mode) {
  require_valid(seq, "simulate_rs");
  require_valid(shutter);
  const double t_m = shutter.mid_offset(seq.frames.front().height);
  return rs_capture(seq, t, t_m, shutter.t_r, mode, "simulate_rs");
}

Frame simulate_gs_blur(const FrameSequence& seq, double t,
                       const ShutterParams& shutter,
                       const SynthesisMode& mode) {
  require_valid(seq, "simulate_gs_blur");
  require_valid(shutter);
  if (shutter.t_e == 0.0)
    return rs_capture(seq, t, 0.0, 0.0, mode, "simulate_gs_blur");
  return windowed_capture(seq, t, 0.0, 0.0, shutter.t_e, mode,
                          "simulate_gs_blur");
}

Frame simulate_rscd(const FrameSequence& seq, double t,
                    const ShutterParams& shutter, const SynthesisMode& mode) {
  require_valid(seq, "simulate_rscd");
  require_valid(shutter);
  const double t_m = shutter.mid_offset(seq.frames.front().height);
  if (shutter.t_e == 0.0)
    return rs_capture(seq, t, t_m, shutter.t_r, mode, "simulate_rscd");
  return windowed_capture(seq, t, t_m, shutter.t_r, shutter.t_e, mode,
                          "simulate_rscd");
}

Frame oracle_rscd(const FrameSequence& seq, double t,
                  const ShutterParams& shutter, int s_dense) {
  require_valid(seq, "oracle_rscd");
  require_valid(shutter);
  if (s_dense < 256)
    throw std::invalid_argument("oracle_rscd: s_dense must be >= 256");

  const Frame& ref = seq.frames.front();
  const int w = ref.width, h = ref.height, c = ref.channels;
  const int n = seq.count();
  const double t_m = shutter.mid_offset(h);
  for (int i = 0; i < h; ++i) {
    const double center = t - t_m + i * shutter.t_r;
    check_time(seq, center - 0.5 * shutter.t_e, "oracle_rscd", i);
    check_time(seq, center + 0.5 * shutter.t_e, "oracle_rscd", i);
  }

  // Deliberately dumb per-pixel temporal loop, kept free of the simulator's
  // row helpers.
  Frame out(w, h, c);
  const int steps = shutter.t_e > 0.0 ? s_dense : 1;
  for (int y = 0; y < h; ++y) {
    const double center = t - t_m + y * shutter.t_r;
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = 0; k < steps; ++k) {
          double tau = center;
          if (shutter.t_e > 0.0)
            tau += -0.5 * shutter.t_e + k * (shutter.t_e / (s_dense - 1));
          double pos = (tau - seq.t0) / seq.dt;
          pos = std::min(std::max(pos, 0.0), static_cast<double>(n - 1));
          int k0 = static_cast<int>(std::floor(pos));
          if (k0 > n - 2) k0 = n - 2;
          const double a = pos - k0;
          const double v0 = seq.frames[k0].at(x, y, ch);
          const double v1 = seq.frames[k0 + 1].at(x, y, ch);
          acc += v0 + a * (v1 - v0);
        }
        out.at(x, y, ch) = static_cast<float>(acc / steps);
      }
    }
  }
  return out;
}

}  // namespace rstk::formation
