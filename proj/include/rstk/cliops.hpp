#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace rstk::cli {

/// Version stamp written into every JSON artifact.
inline constexpr const char* kSpecVersion = "1.0";

/// The only flags allowed to override a manifest. Neither is recorded in
/// the outputs, so reruns with different values stay byte-identical
/// (threads must not change results; out only moves them).
struct CommonOverrides {
  std::optional<std::string> out;
  std::optional<int> threads;
};

// Each command reads a JSON manifest (paths inside it are resolved
// relative to the manifest file), validates it fully, computes, and only
// then writes outputs. They return the process exit status and throw on
// validation or I/O errors.

/// Synthesizes rolling-shutter / blurred / combined frames plus the
/// mid-time ground truth from a frame sequence.
int cmd_synth(const std::filesystem::path& manifest,
              const CommonOverrides& ov = {});

/// Estimates a displacement field between two frames; writes the field
/// tensor and a solve report.
int cmd_flow(const std::filesystem::path& manifest,
             const CommonOverrides& ov = {});

/// Full correction pipeline: flows to both neighbors, row-wise
/// rectification, neighbor alignment, fusion with hole filling.
int cmd_rectify(const std::filesystem::path& manifest,
                const CommonOverrides& ov = {});

/// PSNR/SSIM over image pairs with per-pair and aggregate results.
int cmd_eval(const std::filesystem::path& manifest,
             const CommonOverrides& ov = {});

/// Homography or color-matrix estimation from CSV data; nonzero exit when
/// the residual exceeds the configured threshold.
int cmd_calib(const std::filesystem::path& manifest,
              const CommonOverrides& ov = {});

/// Brute-force formation reference (test tool).
int cmd_oracle(const std::filesystem::path& manifest,
               const CommonOverrides& ov = {});

}  // namespace rstk::cli
