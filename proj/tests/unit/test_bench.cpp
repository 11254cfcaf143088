#include <string>
#include <vector>

#include <doctest.h>

#include "rstk/bench.hpp"
#include "test_util.hpp"

using namespace rstk;

TEST_CASE("the suite knows exactly ten criteria") {
  const auto names = bench::criterion_names();
  CHECK(names.size() == 10);
  for (const auto& n : names) CHECK(!n.empty());
}

TEST_CASE("a wrong velocity estimate fails the rectification criterion") {
  testutil::TempDir dir("bench_negative");
  bench::SuiteConfig cfg;
  cfg.work_dir = (dir.path / "work").string();
  cfg.only = {"rectification_round_trip"};
  cfg.rectify_velocity_scale = 0.0;  // correction does nothing
  const auto res = bench::run_suite(cfg);
  REQUIRE(res.criteria.size() == 1);
  CHECK(!res.criteria[0].passed);
  CHECK(!res.all_passed);
  CHECK(res.criteria[0].details.find("dB") != std::string::npos);
}

TEST_CASE("fast criteria pass and their report is stable across runs") {
  testutil::TempDir dir("bench_fast");
  bench::SuiteConfig cfg;
  cfg.work_dir = (dir.path / "work").string();
  cfg.only = {"metric_fixed_points", "calibration_accuracy",
              "rowcopy_striping"};
  const auto r1 = bench::run_suite(cfg);
  REQUIRE(r1.criteria.size() == 3);
  for (const auto& c : r1.criteria) {
    INFO(c.name << ": " << c.details);
    CHECK(c.passed);
  }
  CHECK(r1.all_passed);

  const auto r2 = bench::run_suite(cfg);
  CHECK(bench::report_json(r1) == bench::report_json(r2));
  CHECK(bench::report_json(r1).find("spec_version") != std::string::npos);
}

TEST_CASE("asking for an unknown criterion is an error") {
  bench::SuiteConfig cfg;
  cfg.only = {"no_such_criterion"};
  CHECK_THROWS(bench::run_suite(cfg));
}
