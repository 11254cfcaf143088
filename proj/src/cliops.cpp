#include "rstk/cliops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "rstk/calib.hpp"
#include "rstk/flow.hpp"
#include "rstk/formation.hpp"
#include "rstk/metrics.hpp"
#include "rstk/parallel.hpp"
#include "rstk/rectify.hpp"
#include "rstk/tensorfile.hpp"

namespace rstk::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

json load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("bad JSON in " + path.string() + ": " + e.what());
  }
  if (!j.is_object())
    throw std::runtime_error("manifest must be a JSON object: " +
                             path.string());
  return j;
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known)
      throw std::runtime_error(where + ": unknown key '" + it.key() + "'");
  }
}

const json& need(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key))
    throw std::runtime_error(where + ": missing key '" + std::string(key) +
                             "'");
  return j.at(key);
}

double as_num(const json& v, const std::string& ctx) {
  if (!v.is_number())
    throw std::runtime_error(ctx + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw std::runtime_error(ctx + " must be finite");
  return d;
}

int as_int(const json& v, const std::string& ctx) {
  if (!v.is_number_integer())
    throw std::runtime_error(ctx + " must be an integer");
  return v.get<int>();
}

std::string as_str(const json& v, const std::string& ctx) {
  if (!v.is_string()) throw std::runtime_error(ctx + " must be a string");
  return v.get<std::string>();
}

double opt_num(const json& j, const std::string& where, const char* key,
               double dflt) {
  return j.contains(key) ? as_num(j.at(key), where + ": " + key) : dflt;
}

int opt_int(const json& j, const std::string& where, const char* key,
            int dflt) {
  return j.contains(key) ? as_int(j.at(key), where + ": " + key) : dflt;
}

std::string opt_str(const json& j, const std::string& where, const char* key,
                    const std::string& dflt) {
  return j.contains(key) ? as_str(j.at(key), where + ": " + key) : dflt;
}

Transfer parse_transfer(const json& j, const std::string& where) {
  const std::string s = opt_str(j, where, "transfer", "srgb");
  if (s == "srgb") return Transfer::srgb;
  if (s == "linear") return Transfer::linear;
  throw std::runtime_error(where + ": transfer must be 'srgb' or 'linear'");
}

int parse_bit_depth(const json& j, const std::string& where) {
  const int d = opt_int(j, where, "bit_depth", 16);
  if (d != 8 && d != 16)
    throw std::runtime_error(where + ": bit_depth must be 8 or 16");
  return d;
}

flow::SolverConfig parse_solver(const json& j, const std::string& where) {
  flow::SolverConfig cfg;
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (!s.is_object())
      throw std::runtime_error(where + ": solver must be an object");
    check_keys(s, where + ": solver",
               {"lambda_c", "lambda_tv", "eps_charb", "levels", "max_iters",
                "initial_step", "backtrack_factor", "max_backtracks",
                "rel_tol"});
    const std::string w = where + ": solver";
    cfg.lambda_c = opt_num(s, w, "lambda_c", cfg.lambda_c);
    cfg.lambda_tv = opt_num(s, w, "lambda_tv", cfg.lambda_tv);
    cfg.eps_charb = opt_num(s, w, "eps_charb", cfg.eps_charb);
    cfg.levels = opt_int(s, w, "levels", cfg.levels);
    cfg.max_iters = opt_int(s, w, "max_iters", cfg.max_iters);
    cfg.initial_step = opt_num(s, w, "initial_step", cfg.initial_step);
    cfg.backtrack_factor =
        opt_num(s, w, "backtrack_factor", cfg.backtrack_factor);
    cfg.max_backtracks = opt_int(s, w, "max_backtracks", cfg.max_backtracks);
    cfg.rel_tol = opt_num(s, w, "rel_tol", cfg.rel_tol);
  }
  flow::require_valid(cfg);
  return cfg;
}

void apply_threads(const CommonOverrides& ov) {
  if (ov.threads) {
    if (*ov.threads < 0)
      throw std::runtime_error("--threads must be >= 0");
    par::set_threads(*ov.threads);
  }
}

fs::path resolve(const fs::path& manifest, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : manifest.parent_path() / p;
}

fs::path out_dir_from(const json& j, const std::string& where,
                      const fs::path& manifest, const CommonOverrides& ov) {
  if (ov.out) return fs::path(*ov.out);
  return resolve(manifest, as_str(need(j, where, "out_dir"), where + ": out_dir"));
}

fs::path out_file_from(const json& j, const std::string& where,
                       const fs::path& manifest, const CommonOverrides& ov) {
  if (ov.out) return fs::path(*ov.out);
  return resolve(manifest, as_str(need(j, where, "out"), where + ": out"));
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json json_db(double v) {
  // JSON has no inf literal; the sentinel is the string "inf"
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

std::string numbered(const char* prefix, int index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.png", prefix, index);
  return buf;
}

formation::SynthesisMode parse_mode(const json& j, const std::string& where) {
  const std::string m = opt_str(j, where, "mode", "interpolate");
  const int spw = opt_int(j, where, "samples_per_window", 16);
  if (spw < 2)
    throw std::runtime_error(where + ": samples_per_window must be >= 2");
  if (m == "interpolate") return formation::interpolate_mode(spw);
  if (m == "rowcopy") {
    formation::SynthesisMode mode = formation::rowcopy_mode();
    mode.samples_per_window = spw;
    return mode;
  }
  throw std::runtime_error(where + ": mode must be 'interpolate' or 'rowcopy'");
}

ShutterParams parse_shutter(const json& j, const std::string& where) {
  ShutterParams sh;
  sh.t_r = as_num(need(j, where, "t_r_us"), where + ": t_r_us") * 1e-6;
  sh.t_e = as_num(need(j, where, "t_e_ms"), where + ": t_e_ms") * 1e-3;
  require_valid(sh);
  return sh;
}

// capture times for which every row's exposure window stays in range
std::pair<double, double> center_range(const FrameSequence& seq,
                                       const ShutterParams& sh) {
  const int rows = seq.frames.front().height;
  const double t_m = sh.mid_offset(rows);
  const double lo = seq.t0 + t_m + 0.5 * sh.t_e;
  const double hi =
      seq.end_time() + t_m - (rows - 1) * sh.t_r - 0.5 * sh.t_e;
  return {lo, hi};
}

std::vector<double> parse_centers(const json& j, const std::string& where,
                                  const FrameSequence& seq,
                                  const ShutterParams& sh) {
  if (j.contains("centers") && j.contains("center_count"))
    throw std::runtime_error(where +
                             ": give either centers or center_count, not both");
  const auto [lo, hi] = center_range(seq, sh);
  if (lo > hi)
    throw std::runtime_error(
        where + ": sequence too short for the requested shutter timing");

  std::vector<double> centers;
  if (j.contains("centers")) {
    const json& arr = j.at("centers");
    if (!arr.is_array() || arr.empty())
      throw std::runtime_error(where + ": centers must be a nonempty array");
    for (const auto& v : arr)
      centers.push_back(as_num(v, where + ": centers entry"));
  } else {
    const int n = opt_int(j, where, "center_count", 1);
    if (n < 1)
      throw std::runtime_error(where + ": center_count must be >= 1");
    if (n == 1) {
      centers.push_back(0.5 * (lo + hi));
    } else {
      for (int i = 0; i < n; ++i)
        centers.push_back(lo + i * (hi - lo) / (n - 1));
    }
  }
  return centers;
}

json sequence_info(const FrameSequence& seq) {
  const Frame& f = seq.frames.front();
  return {{"dt_s", seq.dt},      {"t0_s", seq.t0},
          {"frame_count", seq.count()}, {"width", f.width},
          {"height", f.height},  {"channels", f.channels}};
}

json solver_info(const flow::SolverConfig& c) {
  return {{"lambda_c", c.lambda_c},
          {"lambda_tv", c.lambda_tv},
          {"eps_charb", c.eps_charb},
          {"levels", c.levels},
          {"max_iters", c.max_iters},
          {"initial_step", c.initial_step},
          {"backtrack_factor", c.backtrack_factor},
          {"max_backtracks", c.max_backtracks},
          {"rel_tol", c.rel_tol}};
}

json report_to_json(const flow::SolveReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"iters", l.iters}, {"objective_trace", l.objective}});
  return {{"spec_version", kSpecVersion},
          {"levels", levels},
          {"final_objective", r.final_objective},
          {"grad_inf_norm", r.grad_inf_norm},
          {"converged", r.converged}};
}

// per-row scaling of a field: out(x, row) = factors[row] * f(x, row)
warp::DisplacementField scale_rows(const warp::DisplacementField& f,
                                   const std::vector<double>& factors) {
  warp::DisplacementField out(f.width, f.height);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      out.u(x, y) = static_cast<float>(factors[y] * f.u(x, y));
      out.v(x, y) = static_cast<float>(factors[y] * f.v(x, y));
    }
  return out;
}

std::vector<calib::Rgb> load_patch_column(const fs::path& path, bool measured) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open patch CSV " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty patch CSV " + path.string());
  while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
    line.pop_back();
  if (line != "mr,mg,mb,rr,rg,rb")
    throw std::runtime_error("patch CSV needs header mr,mg,mb,rr,rg,rb, got '" +
                             line + "'");
  std::vector<calib::Rgb> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    double v[6];
    char comma;
    std::istringstream ss(line);
    if (!(ss >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >>
          comma >> v[4] >> comma >> v[5]))
      throw std::runtime_error("bad patch CSV row at line " +
                               std::to_string(line_no));
    out.push_back(measured ? calib::Rgb{v[0], v[1], v[2]}
                           : calib::Rgb{v[3], v[4], v[5]});
  }
  return out;
}

}  // namespace

int cmd_synth(const fs::path& manifest, const CommonOverrides& ov) {
  apply_threads(ov);
  const std::string where = "synth manifest";
  const json j = load_manifest(manifest);
  check_keys(j, where,
             {"sequence", "transfer", "t_r_us", "t_e_ms", "mode",
              "samples_per_window", "outputs", "centers", "center_count",
              "out_dir", "bit_depth"});

  const Transfer transfer = parse_transfer(j, where);
  const int bit_depth = parse_bit_depth(j, where);
  const formation::SynthesisMode mode = parse_mode(j, where);
  const fs::path out_dir = out_dir_from(j, where, manifest, ov);

  std::vector<std::string> kinds = {"rs", "blur", "rscd", "gs"};
  if (j.contains("outputs")) {
    const json& arr = j.at("outputs");
    if (!arr.is_array() || arr.empty())
      throw std::runtime_error(where + ": outputs must be a nonempty array");
    kinds.clear();
    for (const auto& v : arr) {
      const std::string k = as_str(v, where + ": outputs entry");
      if (k != "rs" && k != "blur" && k != "rscd" && k != "gs")
        throw std::runtime_error(where + ": unknown output kind '" + k + "'");
      if (std::find(kinds.begin(), kinds.end(), k) != kinds.end())
        throw std::runtime_error(where + ": duplicate output kind '" + k +
                                 "'");
      kinds.push_back(k);
    }
  }

  const fs::path seq_path =
      resolve(manifest, as_str(need(j, where, "sequence"), where + ": sequence"));
  const FrameSequence seq = load_sequence_manifest(seq_path, transfer);
  const ShutterParams shutter = parse_shutter(j, where);
  const std::vector<double> centers = parse_centers(j, where, seq, shutter);

  // compute everything before creating any output
  struct Item {
    double t;
    std::map<std::string, Frame> outs;
  };
  std::vector<Item> items;
  for (double t : centers) {
    Item item{t, {}};
    for (const std::string& k : kinds) {
      if (k == "rs")
        item.outs[k] = formation::simulate_rs(seq, t, shutter, mode);
      else if (k == "blur")
        item.outs[k] = formation::simulate_gs_blur(seq, t, shutter, mode);
      else if (k == "rscd")
        item.outs[k] = formation::simulate_rscd(seq, t, shutter, mode);
      else
        item.outs[k] = formation::sample_gs(seq, t, mode);
    }
    items.push_back(std::move(item));
  }

  fs::create_directories(out_dir);
  json frames = json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    json files;
    for (const auto& [kind, frame] : items[i].outs) {
      const std::string name = numbered(kind.c_str(), static_cast<int>(i));
      save_image(frame, out_dir / name, transfer, bit_depth);
      files[kind] = name;
    }
    frames.push_back(
        {{"index", static_cast<int>(i)}, {"t_s", items[i].t}, {"outputs", files}});
  }

  const json meta = {
      {"spec_version", kSpecVersion},
      {"sequence", sequence_info(seq)},
      {"shutter", {{"t_r_s", shutter.t_r}, {"t_e_s", shutter.t_e}}},
      {"mode",
       mode.kind == formation::SynthesisMode::Kind::rowcopy ? "rowcopy"
                                                            : "interpolate"},
      {"samples_per_window", mode.samples_per_window},
      {"transfer", transfer == Transfer::srgb ? "srgb" : "linear"},
      {"bit_depth", bit_depth},
      {"frames", frames}};
  write_json_file(out_dir / "metadata.json", meta);
  return 0;
}

int cmd_flow(const fs::path& manifest, const CommonOverrides& ov) {
  apply_threads(ov);
  const std::string where = "flow manifest";
  const json j = load_manifest(manifest);
  check_keys(j, where, {"frame_a", "frame_b", "transfer", "solver", "out_dir"});

  const Transfer transfer = parse_transfer(j, where);
  const flow::SolverConfig cfg = parse_solver(j, where);
  const fs::path out_dir = out_dir_from(j, where, manifest, ov);
  const Frame a = load_image(
      resolve(manifest, as_str(need(j, where, "frame_a"), where + ": frame_a")),
      transfer);
  const Frame b = load_image(
      resolve(manifest, as_str(need(j, where, "frame_b"), where + ": frame_b")),
      transfer);

  const flow::FlowResult res = flow::solve_flow(a, b, cfg);

  fs::create_directories(out_dir);
  io::write_tensor(out_dir / "flow.rstf", io::to_tensor(res.field));
  json report = report_to_json(res.report);
  report["solver"] = solver_info(cfg);
  write_json_file(out_dir / "report.json", report);
  return 0;
}

int cmd_rectify(const fs::path& manifest, const CommonOverrides& ov) {
  apply_threads(ov);
  const std::string where = "rectify manifest";
  const json j = load_manifest(manifest);
  check_keys(j, where,
             {"current", "previous", "next", "flow_prev", "flow_next",
              "transfer", "dt_s", "t_r_us", "t_e_ms", "solver", "out_dir",
              "bit_depth"});

  const Transfer transfer = parse_transfer(j, where);
  const int bit_depth = parse_bit_depth(j, where);
  const flow::SolverConfig cfg = parse_solver(j, where);
  const fs::path out_dir = out_dir_from(j, where, manifest, ov);
  const double dt = as_num(need(j, where, "dt_s"), where + ": dt_s");
  if (!(dt > 0.0)) throw std::runtime_error(where + ": dt_s must be > 0");

  ShutterParams shutter;
  shutter.t_r = as_num(need(j, where, "t_r_us"), where + ": t_r_us") * 1e-6;
  shutter.t_e = opt_num(j, where, "t_e_ms", 0.0) * 1e-3;
  require_valid(shutter);

  const Frame cur = load_image(
      resolve(manifest, as_str(need(j, where, "current"), where + ": current")),
      transfer);
  const Frame prev = load_image(
      resolve(manifest,
              as_str(need(j, where, "previous"), where + ": previous")),
      transfer);
  const Frame next = load_image(
      resolve(manifest, as_str(need(j, where, "next"), where + ": next")),
      transfer);
  if (!prev.same_shape(cur) || !next.same_shape(cur))
    throw std::runtime_error(where + ": neighbor frames differ in dimensions");

  const auto load_flow = [&](const char* key) -> warp::DisplacementField {
    const fs::path p =
        resolve(manifest, as_str(j.at(key), where + ": " + key));
    warp::DisplacementField f = io::field_from_tensor(io::read_tensor(p));
    if (f.width != cur.width || f.height != cur.height)
      throw std::runtime_error(where + ": " + key +
                               " dims do not match the current frame");
    return f;
  };

  // field(q) = content displacement from the current frame's mid time
  // toward the neighbor, spanning dt (or -dt for the previous frame)
  const warp::DisplacementField flow_next =
      j.contains("flow_next") ? load_flow("flow_next")
                              : flow::solve_flow(next, cur, cfg).field;
  const warp::DisplacementField flow_prev =
      j.contains("flow_prev") ? load_flow("flow_prev")
                              : flow::solve_flow(prev, cur, cfg).field;

  const rectify::RectifyResult primary =
      rectify::rectify_with_flow(cur, flow_next, dt, shutter);

  // align neighbors to the mid-row time: their content must be pulled by
  // the remaining fraction of the inter-frame motion at each row
  std::vector<double> fac_next(cur.height), fac_prev(cur.height);
  for (int i = 0; i < cur.height; ++i) {
    const double s = primary.row_offsets[i] / dt;
    fac_next[i] = 1.0 - s;
    fac_prev[i] = 1.0 + s;
  }
  const warp::WarpResult warped_next = warp::backward_warp(
      next, scale_rows(flow_next, fac_next), warp::OobMode::zero);
  const warp::WarpResult warped_prev = warp::backward_warp(
      prev, scale_rows(flow_prev, fac_prev), warp::OobMode::zero);

  const Frame fused = rectify::fuse_aligned(primary, warped_prev, warped_next);

  fs::create_directories(out_dir);
  save_image(fused, out_dir / "corrected.png", transfer, bit_depth);
  io::write_tensor(out_dir / "mask.rstf", io::to_tensor(primary.mask));
  io::write_tensor(out_dir / "flow_to_next.rstf", io::to_tensor(flow_next));
  io::write_tensor(out_dir / "flow_to_prev.rstf", io::to_tensor(flow_prev));
  const json offsets = {{"spec_version", kSpecVersion},
                        {"dt_s", dt},
                        {"t_r_s", shutter.t_r},
                        {"t_e_s", shutter.t_e},
                        {"row_offsets_s", primary.row_offsets}};
  write_json_file(out_dir / "offsets.json", offsets);
  return 0;
}

int cmd_eval(const fs::path& manifest, const CommonOverrides& ov) {
  apply_threads(ov);
  const std::string where = "eval manifest";
  const json j = load_manifest(manifest);
  check_keys(j, where, {"pairs", "space", "with_row_discontinuity", "out"});

  const json& pairs = need(j, where, "pairs");
  if (!pairs.is_array() || pairs.empty())
    throw std::runtime_error(where + ": pairs must be a nonempty array");
  const std::string space = opt_str(j, where, "space", "stored");
  if (space != "stored" && space != "linear")
    throw std::runtime_error(where + ": space must be 'stored' or 'linear'");
  // stored = compare samples as encoded in the files
  const Transfer transfer =
      space == "linear" ? Transfer::srgb : Transfer::linear;
  bool with_rd = false;
  if (j.contains("with_row_discontinuity")) {
    if (!j.at("with_row_discontinuity").is_boolean())
      throw std::runtime_error(where +
                               ": with_row_discontinuity must be a boolean");
    with_rd = j.at("with_row_discontinuity").get<bool>();
  }
  const fs::path out_path = out_file_from(j, where, manifest, ov);

  json entries = json::array();
  double psnr_sum = 0.0, ssim_sum = 0.0;
  int ok_count = 0;
  for (const auto& p : pairs) {
    if (!p.is_object())
      throw std::runtime_error(where + ": each pair must be an object");
    check_keys(p, where + ": pair", {"test", "reference"});
    const std::string test_rel = as_str(need(p, where + ": pair", "test"),
                                        where + ": pair test");
    const std::string ref_rel =
        as_str(need(p, where + ": pair", "reference"), where + ": pair reference");
    json entry = {{"test", test_rel}, {"reference", ref_rel}};
    try {
      const Frame test = load_image(resolve(manifest, test_rel), transfer);
      const Frame ref = load_image(resolve(manifest, ref_rel), transfer);
      const double p_db = metrics::psnr(test, ref);
      const double s = metrics::ssim(test, ref);
      entry["psnr_db"] = json_db(p_db);
      entry["ssim"] = s;
      if (with_rd) entry["row_discontinuity"] = metrics::row_discontinuity(test);
      psnr_sum += p_db;
      ssim_sum += s;
      ++ok_count;
    } catch (const std::exception& e) {
      std::cerr << "eval: skipping pair (" << test_rel << ", " << ref_rel
                << "): " << e.what() << '\n';
      entry["skipped"] = true;
      entry["error"] = e.what();
    }
    entries.push_back(std::move(entry));
  }
  if (ok_count == 0)
    throw std::runtime_error("eval: every pair failed");

  const json report = {
      {"spec_version", kSpecVersion},
      {"pairs", entries},
      {"aggregate",
       {{"psnr_db", json_db(psnr_sum / ok_count)},
        {"ssim", ssim_sum / ok_count},
        {"pair_count", ok_count}}}};
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_json_file(out_path, report);
  return 0;
}

int cmd_calib(const fs::path& manifest, const CommonOverrides& ov) {
  apply_threads(ov);
  const std::string where = "calib manifest";
  const json j = load_manifest(manifest);
  check_keys(j, where,
             {"task", "correspondences", "patches", "rms_threshold", "out"});

  const std::string task = as_str(need(j, where, "task"), where + ": task");
  const double threshold = opt_num(j, where, "rms_threshold", 1.0);
  if (!(threshold > 0.0))
    throw std::runtime_error(where + ": rms_threshold must be > 0");
  const fs::path out_path = out_file_from(j, where, manifest, ov);

  json result = {{"spec_version", kSpecVersion}, {"task", task}};
  double rms = 0.0;
  if (task == "homography") {
    const fs::path csv = resolve(
        manifest, as_str(need(j, where, "correspondences"),
                         where + ": correspondences"));
    const calib::HomographyFit fit =
        calib::estimate_homography(calib::load_correspondences_csv(csv));
    rms = fit.rms;
    result["homography"] = {
        {fit.h.m[0], fit.h.m[1], fit.h.m[2]},
        {fit.h.m[3], fit.h.m[4], fit.h.m[5]},
        {fit.h.m[6], fit.h.m[7], fit.h.m[8]}};
    result["rms_px"] = rms;
  } else if (task == "color") {
    const fs::path csv = resolve(
        manifest, as_str(need(j, where, "patches"), where + ": patches"));
    const auto measured = load_patch_column(csv, true);
    const auto reference = load_patch_column(csv, false);
    const calib::ColorMatrixFit fit =
        calib::estimate_color_matrix(measured, reference);
    rms = fit.rms;
    result["color_matrix"] = {{fit.m[0], fit.m[1], fit.m[2]},
                              {fit.m[3], fit.m[4], fit.m[5]},
                              {fit.m[6], fit.m[7], fit.m[8]}};
    result["rms"] = rms;
  } else {
    throw std::runtime_error(where + ": task must be 'homography' or 'color'");
  }

  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_json_file(out_path, result);
  if (rms > threshold) {
    std::cerr << "calib: rms " << rms << " exceeds threshold " << threshold
              << '\n';
    return 2;
  }
  return 0;
}

int cmd_oracle(const fs::path& manifest, const CommonOverrides& ov) {
  apply_threads(ov);
  const std::string where = "oracle manifest";
  const json j = load_manifest(manifest);
  check_keys(j, where,
             {"sequence", "transfer", "t_r_us", "t_e_ms", "s_dense", "center",
              "out_dir", "bit_depth"});

  const Transfer transfer = parse_transfer(j, where);
  const int bit_depth = parse_bit_depth(j, where);
  const fs::path out_dir = out_dir_from(j, where, manifest, ov);
  const int s_dense = opt_int(j, where, "s_dense", 1024);

  const fs::path seq_path =
      resolve(manifest, as_str(need(j, where, "sequence"), where + ": sequence"));
  const FrameSequence seq = load_sequence_manifest(seq_path, transfer);
  const ShutterParams shutter = parse_shutter(j, where);
  const auto [lo, hi] = center_range(seq, shutter);
  if (lo > hi)
    throw std::runtime_error(
        where + ": sequence too short for the requested shutter timing");
  const double center = opt_num(j, where, "center", 0.5 * (lo + hi));

  const Frame out = formation::oracle_rscd(seq, center, shutter, s_dense);

  fs::create_directories(out_dir);
  save_image(out, out_dir / "oracle_0000.png", transfer, bit_depth);
  const json meta = {
      {"spec_version", kSpecVersion},
      {"sequence", sequence_info(seq)},
      {"shutter", {{"t_r_s", shutter.t_r}, {"t_e_s", shutter.t_e}}},
      {"s_dense", s_dense},
      {"center_s", center},
      {"transfer", transfer == Transfer::srgb ? "srgb" : "linear"},
      {"bit_depth", bit_depth},
      {"output", "oracle_0000.png"}};
  write_json_file(out_dir / "metadata.json", meta);
  return 0;
}

}  // namespace rstk::cli
