#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rstk/cliops.hpp"

namespace {

using CommandFn = int (*)(const std::filesystem::path&,
                          const rstk::cli::CommonOverrides&);

struct Command {
  const char* name;
  const char* desc;
  CommandFn fn;
};

constexpr Command kCommands[] = {
    {"synth", "synthesize rolling-shutter / blurred / combined captures",
     rstk::cli::cmd_synth},
    {"flow", "estimate a displacement field between two frames",
     rstk::cli::cmd_flow},
    {"rectify", "correct a rolling-shutter frame using its neighbors",
     rstk::cli::cmd_rectify},
    {"eval", "PSNR / SSIM report over image pairs", rstk::cli::cmd_eval},
    {"calib", "homography or color-matrix estimation from CSV data",
     rstk::cli::cmd_calib},
    {"oracle", "brute-force reference of the combined capture model",
     rstk::cli::cmd_oracle},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rolling-shutter image formation and correction toolkit"};
  app.require_subcommand(1);

  std::string manifest;
  std::optional<std::string> out;
  std::optional<int> threads;
  CommandFn chosen = nullptr;

  for (const auto& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.desc);
    sub->add_option("manifest", manifest, "JSON manifest path")->required();
    sub->add_option("--out", out,
                    "override the manifest's output path (not recorded)");
    sub->add_option("--threads", threads,
                    "worker thread count, 0 = automatic (not recorded)");
    sub->callback([&chosen, fn = cmd.fn] { chosen = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    rstk::cli::CommonOverrides ov;
    ov.out = out;
    ov.threads = threads;
    return chosen(manifest, ov);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
