#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rstk/image.hpp"
#include "rstk/warp.hpp"

namespace rstk::io {

/// N-dimensional float tensor as stored on disk: magic "RSTF", u32 LE
/// version (= 1), u32 LE ndim, ndim u64 LE dims, then row-major f32 LE
/// payload.
struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<float> data;
};

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

/// Frame stored as [H, W, C]; field stored as [H, W, 2].
Tensor to_tensor(const Frame& f);
Tensor to_tensor(const warp::DisplacementField& f);
Frame frame_from_tensor(const Tensor& t);
warp::DisplacementField field_from_tensor(const Tensor& t);

}  // namespace rstk::io
