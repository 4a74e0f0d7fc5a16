#include "lodens/app.hpp"
#include "lodens/version.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

int main(int argc, char** argv)
{
  CLI::App app{"adaptive density estimation at low-density points"};
  app.set_version_flag("--version", std::string(lodens::version_string));

  lodens::CliRequest req;
  req.threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out_dir;
  app.add_option("command", req.command, "estimate, risk-sim, support-sim, supereff-sim or calibrate")
    ->required()
    ->check(CLI::IsMember({"estimate", "risk-sim", "support-sim", "supereff-sim", "calibrate"}));
  app.add_option("--config", req.config_path, "JSON experiment config")
    ->required()
    ->check(CLI::ExistingFile);
  app.add_option("--output-dir", out_dir, "directory for CSV, JSON and plot files");
  app.add_option("--threads", req.threads, "worker threads")
    ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  if (!out_dir.empty())
    req.output_dir = out_dir;
  return lodens::run(req, std::cout, std::cerr);
}
