// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status 0 only if all pass.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "rstk/bench.hpp"

int main(int argc, char** argv) {
  rstk::bench::SuiteConfig cfg;
  cfg.work_dir = "acceptance_work";
  std::string report_path;

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << '\n';
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--work-dir") {
      cfg.work_dir = value();
    } else if (arg == "--seed") {
      cfg.seed = std::strtoull(value().c_str(), nullptr, 10);
    } else if (arg == "--report") {
      report_path = value();
    } else if (arg == "--only") {
      cfg.only.push_back(value());
    } else if (arg == "--help" || arg == "-h") {
      std::cout << "usage: rstk_acceptance [--work-dir DIR] [--seed N]"
                   " [--report FILE] [--only NAME]...\n";
      return 0;
    } else {
      std::cerr << "unknown argument " << arg << '\n';
      return 2;
    }
  }

  rstk::bench::SuiteResult result;
  try {
    result = rstk::bench::run_suite(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  for (const auto& c : result.criteria)
    std::printf("%s %s (%.2fs): %s\n", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), c.elapsed_s, c.details.c_str());
  std::printf("%zu/%zu criteria passed\n",
              static_cast<std::size_t>(
                  std::count_if(result.criteria.begin(), result.criteria.end(),
                                [](const auto& c) { return c.passed; })),
              result.criteria.size());

  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "cannot write report to " << report_path << '\n';
      return 2;
    }
    out << rstk::bench::report_json(result);
  }

  return result.all_passed ? 0 : 1;
}
