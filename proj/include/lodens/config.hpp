#pragma once

#include "lodens/densities.hpp"
#include "lodens/harness.hpp"
#include "lodens/kernels.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lodens {

struct NamedParams
{
  std::string name;
  std::map<std::string, double> params;
  bool operator==(const NamedParams&) const = default;
};

struct EstimatorSection
{
  std::string kind = "adaptive";
  std::optional<double> c1;   // defaults to 1.1 sup p for simulations
  double c3 = 4.0;
  double r = 1.0;
  bool isotropic = false;
  std::vector<double> beta;   // known smoothness; density metadata if empty
  double zeta1 = 1.0;
  std::vector<std::pair<double, double>> beta_range;
  std::pair<double, double> L_range{0.0, 0.0};
  bool operator==(const EstimatorSection&) const = default;
};

struct SupportSection
{
  Box box;
  std::vector<std::size_t> resolution;
  double c6 = 1.0;
  std::optional<double> beta;    // density metadata if absent
  std::optional<double> gamma;
  bool operator==(const SupportSection&) const = default;
};

struct SupereffSection
{
  double beta1 = 2.0;
  double beta2 = 0.5;
  double t = 0.0;
  double c4 = 0.1;
  bool operator==(const SupereffSection&) const = default;
};

struct CalibrateSection
{
  std::vector<double> c3_list{1.0, 2.0, 4.0, 8.0};
  std::vector<double> c6_list;
  bool operator==(const CalibrateSection&) const = default;
};

//! One experiment run. Parsed strictly: unknown keys are errors.
struct ExperimentConfig
{
  std::string command;
  std::string experiment_id;
  std::optional<NamedParams> density;
  NamedParams kernel{"triangular", {}};
  EstimatorSection estimator;
  std::vector<long long> n_list;
  std::size_t replicates = 0;
  std::vector<std::vector<double>> points;
  std::uint64_t seed = 1;
  std::string normalization = "psi_tilde";
  std::optional<SupportSection> support;
  std::optional<SupereffSection> supereff;
  std::optional<CalibrateSection> calibrate;
  std::optional<std::string> sample_file;
  std::optional<std::string> output_dir;

  bool operator==(const ExperimentConfig&) const = default;
};

//! Parses and validates; error messages name the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
//! Canonical single-line JSON; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& config);

DensityModel make_density(const NamedParams& spec);
KernelSpec make_kernel(const NamedParams& spec, std::size_t d);

//! Estimator constants with c1 resolved against the density.
EstimatorConfig resolve_estimator(const EstimatorSection& s,
                                  const std::optional<DensityModel>& density);

RiskOptions make_risk_options(const ExperimentConfig& c, const DensityModel& p,
                              unsigned threads);
SupportOptions make_support_options(const ExperimentConfig& c,
                                    const DensityModel& p, unsigned threads);
SuperefficiencyOptions make_supereff_options(const ExperimentConfig& c,
                                             unsigned threads);

} // namespace lodens
