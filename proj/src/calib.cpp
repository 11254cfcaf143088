#include "rstk/calib.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rstk/parallel.hpp"

namespace rstk::calib {

namespace {

Eigen::Matrix3d to_eigen(const Homography& h) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = h.m[3 * r + c];
  return m;
}

Homography from_eigen(const Eigen::Matrix3d& m) {
  if (std::abs(m(2, 2)) < 1e-15)
    throw std::domain_error("Homography: cannot normalize, m(2,2) ~ 0");
  Homography h;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) h.m[3 * r + c] = m(r, c) / m(2, 2);
  return h;
}

// similarity bringing points to zero centroid, mean distance sqrt(2)
Eigen::Matrix3d hartley_transform(const Correspondences& c, bool source) {
  double cx = 0, cy = 0;
  for (const auto& p : c) {
    cx += source ? p.sx : p.tx;
    cy += source ? p.sy : p.ty;
  }
  cx /= c.size();
  cy /= c.size();
  double mean_dist = 0;
  for (const auto& p : c) {
    const double dx = (source ? p.sx : p.tx) - cx;
    const double dy = (source ? p.sy : p.ty) - cy;
    mean_dist += std::sqrt(dx * dx + dy * dy);
  }
  mean_dist /= c.size();
  const double s = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

// symmetric transfer residuals: 4 per pair (H forward, H^{-1} backward)
Eigen::VectorXd symmetric_residuals(const Correspondences& c,
                                    const Homography& h) {
  const Homography hi = h.inverse();
  Eigen::VectorXd r(4 * c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto f = h.apply(c[i].sx, c[i].sy);
    const auto b = hi.apply(c[i].tx, c[i].ty);
    r(4 * i + 0) = f[0] - c[i].tx;
    r(4 * i + 1) = f[1] - c[i].ty;
    r(4 * i + 2) = b[0] - c[i].sx;
    r(4 * i + 3) = b[1] - c[i].sy;
  }
  return r;
}

double rms_of(const Eigen::VectorXd& r) {
  // average squared point displacement over all 2N mapped points
  return std::sqrt(r.squaredNorm() / (r.size() / 2));
}

Homography params_to_h(const Eigen::Matrix<double, 8, 1>& p) {
  Homography h;
  for (int i = 0; i < 8; ++i) h.m[i] = p(i);
  h.m[8] = 1.0;
  return h;
}

Homography lm_refine(const Correspondences& c, const Homography& init) {
  Eigen::Matrix<double, 8, 1> p;
  for (int i = 0; i < 8; ++i) p(i) = init.m[i];

  const auto eval = [&](const Eigen::Matrix<double, 8, 1>& q,
                        Eigen::VectorXd& r) -> bool {
    try {
      r = symmetric_residuals(c, params_to_h(q));
    } catch (const std::domain_error&) {
      return false;  // stepped into a singular configuration
    }
    return true;
  };

  Eigen::VectorXd r;
  if (!eval(p, r)) return init;
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  for (int iter = 0; iter < 100; ++iter) {
    // numeric central-difference Jacobian
    Eigen::MatrixXd jac(r.size(), 8);
    for (int k = 0; k < 8; ++k) {
      const double step = std::max(1e-9, 1e-6 * std::abs(p(k)));
      Eigen::Matrix<double, 8, 1> pp = p, pm = p;
      pp(k) += step;
      pm(k) -= step;
      Eigen::VectorXd rp, rm;
      if (!eval(pp, rp) || !eval(pm, rm)) return params_to_h(p);
      jac.col(k) = (rp - rm) / (2 * step);
    }

    const Eigen::Matrix<double, 8, 8> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 8, 1> jtr = jac.transpose() * r;
    if (jtr.lpNorm<Eigen::Infinity>() < 1e-14) break;

    bool stepped = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Eigen::Matrix<double, 8, 8> a = jtj;
      for (int k = 0; k < 8; ++k)
        a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Eigen::Matrix<double, 8, 1> delta = a.ldlt().solve(-jtr);
      Eigen::VectorXd r_new;
      const Eigen::Matrix<double, 8, 1> p_new = p + delta;
      if (eval(p_new, r_new) && r_new.squaredNorm() < cost) {
        p = p_new;
        r = r_new;
        const double new_cost = r_new.squaredNorm();
        const bool tiny = cost - new_cost <= 1e-15 * std::max(cost, 1e-300) ||
                          delta.lpNorm<Eigen::Infinity>() < 1e-13;
        cost = new_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        stepped = true;
        if (tiny) return params_to_h(p);
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) break;
  }
  return params_to_h(p);
}

}  // namespace

std::array<double, 2> Homography::apply(double x, double y) const {
  const double w = m[6] * x + m[7] * y + m[8];
  if (std::abs(w) < 1e-15)
    throw std::domain_error("Homography: point maps to infinity");
  return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
}

Homography Homography::inverse() const {
  const Eigen::Matrix3d m3 = to_eigen(*this);
  if (std::abs(m3.determinant()) < 1e-12)
    throw std::domain_error("Homography: singular, cannot invert");
  return from_eigen(Eigen::Matrix3d(m3.inverse()));
}

Correspondences load_correspondences_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("load_correspondences_csv: cannot open " +
                             path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_correspondences_csv: empty file");
  // tolerate trailing whitespace/CR in the header
  std::string header = line;
  while (!header.empty() && (header.back() == '\r' || header.back() == ' '))
    header.pop_back();
  if (header != "sx,sy,tx,ty")
    throw std::runtime_error(
        "load_correspondences_csv: expected header sx,sy,tx,ty, got '" +
        header + "'");

  Correspondences c;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    PointPair p{};
    char comma;
    if (!(ss >> p.sx >> comma >> p.sy >> comma >> p.tx >> comma >> p.ty))
      throw std::runtime_error("load_correspondences_csv: bad row at line " +
                               std::to_string(line_no));
    c.push_back(p);
  }
  return c;
}

HomographyFit estimate_homography(const Correspondences& c) {
  if (c.size() < 4)
    throw std::invalid_argument(
        "estimate_homography: insufficient pairs (need >= 4, got " +
        std::to_string(c.size()) + ")");
  for (const auto& p : c)
    if (!std::isfinite(p.sx) || !std::isfinite(p.sy) || !std::isfinite(p.tx) ||
        !std::isfinite(p.ty))
      throw std::invalid_argument("estimate_homography: non-finite point");

  const Eigen::Matrix3d ts = hartley_transform(c, true);
  const Eigen::Matrix3d tt = hartley_transform(c, false);

  Eigen::MatrixXd a(2 * c.size(), 9);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Eigen::Vector3d s = ts * Eigen::Vector3d(c[i].sx, c[i].sy, 1.0);
    const Eigen::Vector3d t = tt * Eigen::Vector3d(c[i].tx, c[i].ty, 1.0);
    const double x = s(0), y = s(1), xp = t(0), yp = t(1);
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, x * xp, y * xp, xp;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, x * yp, y * yp, yp;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // the design matrix must have rank 8: a second vanishing singular value
  // means the solution is not unique (e.g. collinear points)
  if (!(sv(0) > 0.0) || sv(7) < 1e-9 * sv(0))
    throw std::invalid_argument(
        "estimate_homography: degenerate configuration");

  const Eigen::VectorXd hvec = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7),
      hvec(8);
  const Eigen::Matrix3d h = tt.inverse() * hn * ts;

  HomographyFit fit;
  fit.h = lm_refine(c, from_eigen(h));
  fit.rms = rms_of(symmetric_residuals(c, fit.h));
  return fit;
}

Frame apply_homography(const Frame& frame, const Homography& h,
                       warp::OobMode oob) {
  require_valid(frame, "apply_homography");
  const Homography hi = h.inverse();
  const int w = frame.width, hh = frame.height, c = frame.channels;
  Frame out(w, hh, c);
  par::for_chunks(static_cast<std::size_t>(hh), [&](std::size_t b,
                                                    std::size_t e) {
    for (std::size_t yy = b; yy < e; ++yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < w; ++x) {
        auto src = hi.apply(x, y);
        double px = src[0], py = src[1];
        if (oob == warp::OobMode::clamp) {
          px = std::min(std::max(px, 0.0), w - 1.0);
          py = std::min(std::max(py, 0.0), hh - 1.0);
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
            if (oob == warp::OobMode::clamp) {
              xi = std::min(std::max(xi, 0), w - 1);
              yi = std::min(std::max(yi, 0), hh - 1);
            } else if (xi < 0 || xi >= w || yi < 0 || yi >= hh) {
              continue;
            }
            acc += wt[t] * frame.at(xi, yi, ch);
          }
          out.at(x, y, ch) = static_cast<float>(acc);
        }
      }
    }
  });
  return out;
}

ColorMatrixFit estimate_color_matrix(const std::vector<Rgb>& measured,
                                     const std::vector<Rgb>& reference) {
  if (measured.size() != reference.size())
    throw std::invalid_argument(
        "estimate_color_matrix: patch lists differ in length");
  if (measured.size() < 3)
    throw std::invalid_argument(
        "estimate_color_matrix: need >= 3 patches, got " +
        std::to_string(measured.size()));

  Eigen::MatrixXd a(measured.size(), 3);
  Eigen::MatrixXd b(measured.size(), 3);
  for (std::size_t i = 0; i < measured.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      a(i, c) = measured[i][c];
      b(i, c) = reference[i][c];
    }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3)
    throw std::invalid_argument(
        "estimate_color_matrix: rank-deficient measurements");

  // rows of M solve a^T-style least squares per output channel
  ColorMatrixFit fit;
  double cost = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Eigen::Vector3d row = qr.solve(b.col(c));
    for (int k = 0; k < 3; ++k) fit.m[3 * c + k] = row(k);
    cost += (a * row - b.col(c)).squaredNorm();
  }
  fit.rms = std::sqrt(cost / (3.0 * measured.size()));
  return fit;
}

}  // namespace rstk::calib
