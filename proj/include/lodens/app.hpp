#pragma once

#include "lodens/config.hpp"
#include "lodens/sample.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace lodens {

struct CliRequest
{
  std::string command;
  std::string config_path;
  std::optional<std::string> output_dir;
  unsigned threads = 1;
};

//! Headerless CSV, one observation per row. Fewer than two rows is an error.
Sample read_sample_csv(const std::string& path);

//! Prints the estimate and its selection trace for every configured point.
void estimate_command(const ExperimentConfig& config, std::ostream& out);

//! Dispatches one command; returns the process exit code. Diagnostics go to
//! `err`, progress lines to `out`.
int run(const CliRequest& request, std::ostream& out, std::ostream& err);

} // namespace lodens
