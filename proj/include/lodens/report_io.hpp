#pragma once

#include "lodens/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lodens {

//! Shortest round-trip decimal form; "nan", "inf" for non-finite values.
std::string format_double(double v);

//! Provenance stamped into every output file.
struct Provenance
{
  std::string version;
  std::uint64_t seed = 0;
  std::string config_json;   // canonical config echo
};

//! CSV rows: experiment_id,n,t,replicates,mean_abs_err,normalized_risk,stderr
std::string risk_csv(const std::vector<RiskReport>& reports,
                     const Provenance& prov);
//! Two-column log n / log risk blocks, one per series, separated by blank
//! lines.
std::string plot_tsv(const std::vector<RiskReport>& reports,
                     const Provenance& prov);
//! Slopes with 2 sigma intervals, config echo, seed and version.
std::string summary_json(const std::vector<RiskReport>& reports,
                         const Provenance& prov,
                         const std::string& extra_json = "");

//! JSON object with the per-n rows of the superefficiency run.
std::string supereff_json(const SuperefficiencyReport& rep);
//! Risk series under p_n and q_n in RiskReport form for the CSV/plot writers.
std::vector<RiskReport> supereff_series(const SuperefficiencyReport& rep);

//! Writes <id>.csv, <id>.summary.json and <id>.plot.tsv; returns the paths.
std::vector<std::filesystem::path> write_outputs(
  const std::filesystem::path& dir, const std::string& id,
  const std::vector<RiskReport>& reports, const Provenance& prov,
  const std::string& extra_json = "");

} // namespace lodens
