#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rstk::bench {

/// Acceptance suite configuration. Everything is generated on the fly from
/// the seed; work_dir only holds scratch files for the pipeline criteria.
struct SuiteConfig {
  std::uint64_t seed = 1;
  std::filesystem::path work_dir = "rstk_suite_work";
  // 1.0 feeds the rectifier the true velocity. Any other value is a
  // deliberate negative control for the round-trip criterion.
  double rectify_velocity_scale = 1.0;
  std::vector<std::string> only;  // criterion name filter; empty runs all
};

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string details;     // measured values, deterministic formatting
  double elapsed_s = 0.0;  // informational; never serialized
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  bool all_passed = true;
};

std::vector<std::string> criterion_names();

/// Runs the acceptance criteria sequentially. Exceptions inside a
/// criterion mark it failed instead of aborting the suite.
SuiteResult run_suite(const SuiteConfig& cfg);

/// Canonical report bytes: same seed, same bytes. Timings are excluded.
std::string report_json(const SuiteResult& r);

}  // namespace rstk::bench
