#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstk/calib.hpp"
#include "rstk/cliops.hpp"
#include "rstk/flow.hpp"
#include "rstk/formation.hpp"
#include "rstk/metrics.hpp"
#include "rstk/nn.hpp"
#include "rstk/parallel.hpp"
#include "rstk/rectify.hpp"
#include "rstk/synth.hpp"
#include "rstk/tensorfile.hpp"
#include "rstk/warp.hpp"

namespace py = pybind11;
using namespace rstk;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Frame frame_from_array(const FloatArray& a, const char* what) {
  const auto info = a.request();
  if (info.ndim != 2 && info.ndim != 3)
    throw std::invalid_argument(std::string(what) +
                                ": expected an (H, W) or (H, W, C) array");
  Frame f;
  f.height = static_cast<int>(info.shape[0]);
  f.width = static_cast<int>(info.shape[1]);
  f.channels = info.ndim == 3 ? static_cast<int>(info.shape[2]) : 1;
  const float* src = static_cast<const float*>(info.ptr);
  const std::size_t n =
      static_cast<std::size_t>(f.height) * f.width * f.channels;
  f.data.assign(src, src + n);
  return f;
}

py::array frame_to_array(const Frame& f) {
  py::array_t<float> out({f.height, f.width, f.channels});
  std::memcpy(out.mutable_data(), f.data.data(),
              f.data.size() * sizeof(float));
  return out;
}

warp::DisplacementField field_from_array(const FloatArray& a,
                                         const char* what) {
  const auto info = a.request();
  if (info.ndim != 3 || info.shape[2] != 2)
    throw std::invalid_argument(std::string(what) +
                                ": expected an (H, W, 2) array");
  warp::DisplacementField d(static_cast<int>(info.shape[1]),
                            static_cast<int>(info.shape[0]));
  const float* src = static_cast<const float*>(info.ptr);
  std::copy(src, src + d.data.size(), d.data.begin());
  return d;
}

py::array field_to_array(const warp::DisplacementField& d) {
  py::array_t<float> out({d.height, d.width, 2});
  std::memcpy(out.mutable_data(), d.data.data(),
              d.data.size() * sizeof(float));
  return out;
}

FrameSequence sequence_from_list(const std::vector<FloatArray>& frames,
                                 double dt, double t0) {
  FrameSequence seq;
  seq.dt = dt;
  seq.t0 = t0;
  for (const auto& a : frames)
    seq.frames.push_back(frame_from_array(a, "sequence frame"));
  return seq;
}

formation::SynthesisMode mode_from_string(const std::string& mode, int spw) {
  if (mode == "interpolate") return formation::interpolate_mode(spw);
  if (mode == "rowcopy") return formation::rowcopy_mode();
  throw std::invalid_argument("mode must be 'interpolate' or 'rowcopy'");
}

warp::OobMode oob_from_string(const std::string& oob) {
  if (oob == "zero") return warp::OobMode::zero;
  if (oob == "clamp") return warp::OobMode::clamp;
  throw std::invalid_argument("oob must be 'zero' or 'clamp'");
}

py::dict report_to_dict(const flow::SolveReport& r) {
  py::list levels;
  for (const auto& l : r.levels) {
    py::dict d;
    d["iters"] = l.iters;
    d["objective_trace"] = l.objective;
    levels.append(d);
  }
  py::dict d;
  d["levels"] = levels;
  d["final_objective"] = r.final_objective;
  d["grad_inf_norm"] = r.grad_inf_norm;
  d["converged"] = r.converged;
  return d;
}

flow::SolverConfig config_from_kwargs(double lambda_c, double lambda_tv,
                                      double eps_charb, int levels,
                                      int max_iters, double initial_step,
                                      double backtrack_factor,
                                      int max_backtracks, double rel_tol) {
  flow::SolverConfig cfg;
  cfg.lambda_c = lambda_c;
  cfg.lambda_tv = lambda_tv;
  cfg.eps_charb = eps_charb;
  cfg.levels = levels;
  cfg.max_iters = max_iters;
  cfg.initial_step = initial_step;
  cfg.backtrack_factor = backtrack_factor;
  cfg.max_backtracks = max_backtracks;
  cfg.rel_tol = rel_tol;
  return cfg;
}

py::array mat3_to_array(const std::array<double, 9>& m) {
  py::array_t<double> out({3, 3});
  std::memcpy(out.mutable_data(), m.data(), 9 * sizeof(double));
  return out;
}

}  // namespace

PYBIND11_MODULE(_rstk, m) {
  m.doc() = "rolling-shutter formation simulator and correction toolkit";

  m.def("set_threads", &par::set_threads, py::arg("n"),
        "Worker thread count; 0 restores the hardware default.");

  m.def(
      "synth_scene",
      [](const std::string& generator, int width, int height, int channels,
         int frame_count, double fps, double t0, double velocity_x,
         double velocity_y, double angular_velocity, int checker_cell,
         std::uint64_t seed) {
        synth::SceneParams p;
        p.generator = generator;
        p.width = width;
        p.height = height;
        p.channels = channels;
        p.frame_count = frame_count;
        p.fps = fps;
        p.t0 = t0;
        p.velocity_x = velocity_x;
        p.velocity_y = velocity_y;
        p.angular_velocity = angular_velocity;
        p.checker_cell = checker_cell;
        p.seed = seed;
        const FrameSequence seq = synth::generate_scene(p);
        py::list frames;
        for (const auto& f : seq.frames) frames.append(frame_to_array(f));
        return py::make_tuple(frames, seq.dt, seq.t0);
      },
      py::arg("generator") = "pan", py::arg("width") = 64,
      py::arg("height") = 64, py::arg("channels") = 3,
      py::arg("frame_count") = 8, py::arg("fps") = 240.0, py::arg("t0") = 0.0,
      py::arg("velocity_x") = 0.0, py::arg("velocity_y") = 0.0,
      py::arg("angular_velocity") = 0.0, py::arg("checker_cell") = 4,
      py::arg("seed") = 1,
      "Renders a synthetic scene; returns (frames, dt, t0).");

#define RSTK_CAPTURE_ARGS                                                  \
  py::arg("frames"), py::arg("dt"), py::arg("t0"), py::arg("t"),           \
      py::arg("t_r"), py::arg("t_e"), py::arg("mode") = "interpolate",     \
      py::arg("samples_per_window") = 16

  m.def(
      "sample_gs",
      [](const std::vector<FloatArray>& frames, double dt, double t0, double t,
         const std::string& mode, int spw) {
        return frame_to_array(formation::sample_gs(
            sequence_from_list(frames, dt, t0), t, mode_from_string(mode, spw)));
      },
      py::arg("frames"), py::arg("dt"), py::arg("t0"), py::arg("t"),
      py::arg("mode") = "interpolate", py::arg("samples_per_window") = 16,
      "Instantaneous global-shutter sample at time t.");

  m.def(
      "simulate_rs",
      [](const std::vector<FloatArray>& frames, double dt, double t0, double t,
         double t_r, double t_e, const std::string& mode, int spw) {
        return frame_to_array(formation::simulate_rs(
            sequence_from_list(frames, dt, t0), t, ShutterParams{t_r, t_e},
            mode_from_string(mode, spw)));
      },
      RSTK_CAPTURE_ARGS, "Rolling-shutter capture centered at time t.");

  m.def(
      "simulate_gs_blur",
      [](const std::vector<FloatArray>& frames, double dt, double t0, double t,
         double t_r, double t_e, const std::string& mode, int spw) {
        return frame_to_array(formation::simulate_gs_blur(
            sequence_from_list(frames, dt, t0), t, ShutterParams{t_r, t_e},
            mode_from_string(mode, spw)));
      },
      RSTK_CAPTURE_ARGS, "Global-shutter capture with exposure blur.");

  m.def(
      "simulate_rscd",
      [](const std::vector<FloatArray>& frames, double dt, double t0, double t,
         double t_r, double t_e, const std::string& mode, int spw) {
        return frame_to_array(formation::simulate_rscd(
            sequence_from_list(frames, dt, t0), t, ShutterParams{t_r, t_e},
            mode_from_string(mode, spw)));
      },
      RSTK_CAPTURE_ARGS, "Rolling shutter combined with exposure blur.");

#undef RSTK_CAPTURE_ARGS

  m.def(
      "oracle_rscd",
      [](const std::vector<FloatArray>& frames, double dt, double t0, double t,
         double t_r, double t_e, int s_dense) {
        return frame_to_array(
            formation::oracle_rscd(sequence_from_list(frames, dt, t0), t,
                                   ShutterParams{t_r, t_e}, s_dense));
      },
      py::arg("frames"), py::arg("dt"), py::arg("t0"), py::arg("t"),
      py::arg("t_r"), py::arg("t_e"), py::arg("s_dense") = 1024,
      "Brute-force capture reference.");

  m.def(
      "backward_warp",
      [](const FloatArray& src, const FloatArray& field,
         const std::string& oob) {
        const auto r =
            warp::backward_warp(frame_from_array(src, "backward_warp"),
                                field_from_array(field, "backward_warp"),
                                oob_from_string(oob));
        return py::make_tuple(frame_to_array(r.frame), frame_to_array(r.mask));
      },
      py::arg("src"), py::arg("field"), py::arg("oob") = "zero",
      "Gather warp; returns (frame, mask).");

  m.def(
      "forward_warp",
      [](const FloatArray& src, const FloatArray& field, double w_min) {
        const auto r =
            warp::forward_warp(frame_from_array(src, "forward_warp"),
                               field_from_array(field, "forward_warp"), w_min);
        return py::make_tuple(frame_to_array(r.frame), frame_to_array(r.mask));
      },
      py::arg("src"), py::arg("field"), py::arg("w_min") = 1e-4,
      "Scatter warp; returns (frame, mask).");

  m.def(
      "solve_flow",
      [](const FloatArray& a, const FloatArray& b, double lambda_c,
         double lambda_tv, double eps_charb, int levels, int max_iters,
         double initial_step, double backtrack_factor, int max_backtracks,
         double rel_tol) {
        const auto res =
            flow::solve_flow(frame_from_array(a, "solve_flow"),
                             frame_from_array(b, "solve_flow"),
                             config_from_kwargs(lambda_c, lambda_tv, eps_charb,
                                                levels, max_iters, initial_step,
                                                backtrack_factor,
                                                max_backtracks, rel_tol));
        return py::make_tuple(field_to_array(res.field),
                              report_to_dict(res.report));
      },
      py::arg("a"), py::arg("b"), py::arg("lambda_c") = 10.0,
      py::arg("lambda_tv") = 0.1, py::arg("eps_charb") = 1e-3,
      py::arg("levels") = 3, py::arg("max_iters") = 200,
      py::arg("initial_step") = 1.0, py::arg("backtrack_factor") = 0.5,
      py::arg("max_backtracks") = 20, py::arg("rel_tol") = 1e-6,
      "Displacement field a -> b; returns (field, report).");

  m.def(
      "rectify_global",
      [](const FloatArray& rs, double vx, double vy, double t_r, double t_e) {
        const auto r =
            rectify::rectify_global(frame_from_array(rs, "rectify_global"),
                                    rectify::GlobalMotion{vx, vy},
                                    ShutterParams{t_r, t_e});
        return py::make_tuple(frame_to_array(r.output), frame_to_array(r.mask),
                              r.row_offsets);
      },
      py::arg("rs"), py::arg("vx"), py::arg("vy"), py::arg("t_r"),
      py::arg("t_e") = 0.0,
      "Constant-velocity row correction; returns (output, mask, offsets).");

  m.def(
      "rectify_with_flow",
      [](const FloatArray& rs, const FloatArray& flow_next, double dt,
         double t_r, double t_e) {
        const auto r = rectify::rectify_with_flow(
            frame_from_array(rs, "rectify_with_flow"),
            field_from_array(flow_next, "rectify_with_flow"), dt,
            ShutterParams{t_r, t_e});
        return py::make_tuple(frame_to_array(r.output), frame_to_array(r.mask),
                              r.row_offsets);
      },
      py::arg("rs"), py::arg("flow_next"), py::arg("dt"), py::arg("t_r"),
      py::arg("t_e") = 0.0,
      "Flow-driven row correction; returns (output, mask, offsets).");

  m.def(
      "fuse_aligned",
      [](const FloatArray& primary, const FloatArray& primary_mask,
         const FloatArray& prev, const FloatArray& prev_mask,
         const FloatArray& next, const FloatArray& next_mask) {
        rectify::RectifyResult p;
        p.output = frame_from_array(primary, "fuse_aligned");
        p.mask = frame_from_array(primary_mask, "fuse_aligned");
        warp::WarpResult wp{frame_from_array(prev, "fuse_aligned"),
                            frame_from_array(prev_mask, "fuse_aligned")};
        warp::WarpResult wn{frame_from_array(next, "fuse_aligned"),
                            frame_from_array(next_mask, "fuse_aligned")};
        return frame_to_array(rectify::fuse_aligned(p, wp, wn));
      },
      py::arg("primary"), py::arg("primary_mask"), py::arg("prev"),
      py::arg("prev_mask"), py::arg("next"), py::arg("next_mask"),
      "Mask-weighted fusion with hole filling.");

  m.def(
      "psnr",
      [](const FloatArray& a, const FloatArray& b, double peak) {
        return metrics::psnr(frame_from_array(a, "psnr"),
                             frame_from_array(b, "psnr"), peak);
      },
      py::arg("a"), py::arg("b"), py::arg("peak") = 1.0);

  m.def("ssim", [](const FloatArray& a, const FloatArray& b) {
    return metrics::ssim(frame_from_array(a, "ssim"),
                         frame_from_array(b, "ssim"));
  });

  m.def("row_discontinuity", [](const FloatArray& a) {
    return metrics::row_discontinuity(frame_from_array(a, "row_discontinuity"));
  });

  m.def(
      "conv2d",
      [](const FloatArray& input, const FloatArray& taps, int stride) {
        const auto info = taps.request();
        if (info.ndim != 4 || info.shape[2] != info.shape[3])
          throw std::invalid_argument(
              "conv2d: taps must be (out_c, in_c, k, k)");
        nn::ConvWeights w;
        w.out_channels = static_cast<int>(info.shape[0]);
        w.in_channels = static_cast<int>(info.shape[1]);
        w.k = static_cast<int>(info.shape[2]);
        w.stride = stride;
        const float* t = static_cast<const float*>(info.ptr);
        w.taps.assign(t, t + info.size);
        return frame_to_array(nn::conv2d(frame_from_array(input, "conv2d"), w));
      },
      py::arg("input"), py::arg("taps"), py::arg("stride") = 1,
      "Dense cross-correlation over an (H, W, C) array.");

  m.def(
      "deform_conv2d",
      [](const FloatArray& input, const FloatArray& taps,
         const FloatArray& offsets, int stride, int groups) {
        const auto ti = taps.request();
        if (ti.ndim != 4 || ti.shape[2] != ti.shape[3])
          throw std::invalid_argument(
              "deform_conv2d: taps must be (out_c, in_c, k, k)");
        nn::ConvWeights w;
        w.out_channels = static_cast<int>(ti.shape[0]);
        w.in_channels = static_cast<int>(ti.shape[1]);
        w.k = static_cast<int>(ti.shape[2]);
        w.stride = stride;
        const float* t = static_cast<const float*>(ti.ptr);
        w.taps.assign(t, t + ti.size);

        const auto oi = offsets.request();
        if (oi.ndim != 5 || oi.shape[4] != 2 ||
            oi.shape[3] != w.k * w.k)
          throw std::invalid_argument(
              "deform_conv2d: offsets must be (H_out, W_out, groups, k*k, 2)");
        nn::OffsetGrid grid;
        grid.height = static_cast<int>(oi.shape[0]);
        grid.width = static_cast<int>(oi.shape[1]);
        grid.groups = static_cast<int>(oi.shape[2]);
        grid.k = w.k;
        const float* o = static_cast<const float*>(oi.ptr);
        grid.data.assign(o, o + oi.size);
        if (grid.groups != groups)
          throw std::invalid_argument(
              "deform_conv2d: groups does not match the offsets array");
        return frame_to_array(
            nn::deform_conv2d(frame_from_array(input, "deform_conv2d"), w,
                              grid));
      },
      py::arg("input"), py::arg("taps"), py::arg("offsets"),
      py::arg("stride") = 1, py::arg("groups") = 1,
      "Deformable cross-correlation with per-tap offsets.");

  m.def(
      "se_attention",
      [](const FloatArray& input, const FloatArray& w1, const FloatArray& w2) {
        const auto i1 = w1.request(), i2 = w2.request();
        if (i1.ndim != 2 || i2.ndim != 2 || i1.shape[0] != i2.shape[1] ||
            i1.shape[1] != i2.shape[0])
          throw std::invalid_argument(
              "se_attention: w1 must be (reduced, C) and w2 (C, reduced)");
        nn::SEWeights w;
        w.reduced = static_cast<int>(i1.shape[0]);
        w.channels = static_cast<int>(i1.shape[1]);
        const float* p1 = static_cast<const float*>(i1.ptr);
        const float* p2 = static_cast<const float*>(i2.ptr);
        w.w1.assign(p1, p1 + i1.size);
        w.w2.assign(p2, p2 + i2.size);
        return frame_to_array(
            nn::se_attention(frame_from_array(input, "se_attention"), w));
      },
      py::arg("input"), py::arg("w1"), py::arg("w2"),
      "Channel gating by squeeze and excitation.");

  m.def(
      "estimate_homography",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             pts) {
        const auto info = pts.request();
        if (info.ndim != 2 || info.shape[1] != 4)
          throw std::invalid_argument(
              "estimate_homography: points must be (N, 4) as sx, sy, tx, ty");
        calib::Correspondences c;
        const double* p = static_cast<const double*>(info.ptr);
        for (py::ssize_t i = 0; i < info.shape[0]; ++i)
          c.push_back({p[i * 4], p[i * 4 + 1], p[i * 4 + 2], p[i * 4 + 3]});
        const auto fit = calib::estimate_homography(c);
        return py::make_tuple(mat3_to_array(fit.h.m), fit.rms);
      },
      py::arg("points"), "Projective fit; returns (H, rms_px).");

  m.def(
      "apply_homography",
      [](const FloatArray& frame,
         const py::array_t<double, py::array::c_style | py::array::forcecast>&
             h,
         const std::string& oob) {
        const auto info = h.request();
        if (info.ndim != 2 || info.shape[0] != 3 || info.shape[1] != 3)
          throw std::invalid_argument("apply_homography: H must be 3x3");
        calib::Homography hh;
        const double* p = static_cast<const double*>(info.ptr);
        for (int i = 0; i < 9; ++i) hh.m[i] = p[i];
        if (hh.m[8] == 0.0)
          throw std::invalid_argument("apply_homography: H[2,2] must be != 0");
        for (int i = 0; i < 9; ++i) hh.m[i] /= p[8];
        return frame_to_array(
            calib::apply_homography(frame_from_array(frame, "apply_homography"),
                                    hh, oob_from_string(oob)));
      },
      py::arg("frame"), py::arg("h"), py::arg("oob") = "zero",
      "Inverse-map resampling under a homography.");

  m.def(
      "estimate_color_matrix",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             measured,
         const py::array_t<double, py::array::c_style | py::array::forcecast>&
             reference) {
        const auto mi = measured.request(), ri = reference.request();
        if (mi.ndim != 2 || mi.shape[1] != 3 || ri.ndim != 2 ||
            ri.shape[1] != 3)
          throw std::invalid_argument(
              "estimate_color_matrix: patch arrays must be (N, 3)");
        auto to_rgb = [](const py::buffer_info& info) {
          std::vector<calib::Rgb> v;
          const double* p = static_cast<const double*>(info.ptr);
          for (py::ssize_t i = 0; i < info.shape[0]; ++i)
            v.push_back({p[i * 3], p[i * 3 + 1], p[i * 3 + 2]});
          return v;
        };
        const auto fit =
            calib::estimate_color_matrix(to_rgb(mi), to_rgb(ri));
        return py::make_tuple(mat3_to_array(fit.m), fit.rms);
      },
      py::arg("measured"), py::arg("reference"),
      "Least-squares color correction; returns (M, rms).");

  m.def(
      "read_tensor",
      [](const std::filesystem::path& path) {
        const io::Tensor t = io::read_tensor(path);
        std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
        py::array_t<float> out(shape);
        std::memcpy(out.mutable_data(), t.data.data(),
                    t.data.size() * sizeof(float));
        return out;
      },
      py::arg("path"), "Reads an RSTF tensor file.");

  m.def(
      "write_tensor",
      [](const std::filesystem::path& path, const FloatArray& a) {
        const auto info = a.request();
        io::Tensor t;
        for (py::ssize_t i = 0; i < info.ndim; ++i)
          t.dims.push_back(static_cast<std::uint64_t>(info.shape[i]));
        const float* p = static_cast<const float*>(info.ptr);
        t.data.assign(p, p + info.size);
        io::write_tensor(path, t);
      },
      py::arg("path"), py::arg("array"), "Writes an RSTF tensor file.");

  m.def(
      "load_image",
      [](const std::filesystem::path& path, const std::string& transfer) {
        if (transfer != "srgb" && transfer != "linear")
          throw std::invalid_argument("transfer must be 'srgb' or 'linear'");
        return frame_to_array(load_image(
            path, transfer == "srgb" ? Transfer::srgb : Transfer::linear));
      },
      py::arg("path"), py::arg("transfer") = "srgb");

  m.def(
      "save_image",
      [](const std::filesystem::path& path, const FloatArray& frame,
         const std::string& transfer, int bit_depth) {
        if (transfer != "srgb" && transfer != "linear")
          throw std::invalid_argument("transfer must be 'srgb' or 'linear'");
        save_image(frame_from_array(frame, "save_image"), path,
                   transfer == "srgb" ? Transfer::srgb : Transfer::linear,
                   bit_depth);
      },
      py::arg("path"), py::arg("frame"), py::arg("transfer") = "srgb",
      py::arg("bit_depth") = 16);
}
