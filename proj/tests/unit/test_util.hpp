#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstk/image.hpp"
#include "rstk/random.hpp"
#include "rstk/warp.hpp"

namespace testutil {

inline double max_abs_diff(const rstk::Frame& a, const rstk::Frame& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
  return m;
}

inline rstk::Frame constant_frame(int w, int h, int c, float v) {
  return rstk::Frame(w, h, c, v);
}

inline rstk::Frame random_frame(int w, int h, int c, rstk::rng::SplitMix64& g,
                                double lo = 0.0, double hi = 1.0) {
  rstk::Frame f(w, h, c);
  for (auto& v : f.data)
    v = static_cast<float>(rstk::rng::uniform(g, lo, hi));
  return f;
}

inline std::vector<double> to_d(const std::vector<float>& v) {
  return std::vector<double>(v.begin(), v.end());
}

/// Unique scratch directory under the build tree, wiped per construction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::path("test_tmp") / tag;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
};

}  // namespace testutil
