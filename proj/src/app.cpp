#include "lodens/app.hpp"
#include "lodens/report_io.hpp"
#include "lodens/version.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace lodens {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string index_label(const MultiIndex& j)
{
  std::string s = "(";
  for (std::size_t i = 0; i < j.size(); ++i)
    s += (i ? "," : "") + std::to_string(j[i]);
  return s + ")";
}

std::string vec_label(const std::vector<double>& v)
{
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + format_double(v[i]);
  return s + ")";
}

Provenance provenance(const ExperimentConfig& c)
{
  return {version_string, c.seed, to_json(c)};
}

std::filesystem::path output_dir(const ExperimentConfig& c,
                                 const CliRequest& req)
{
  if (req.output_dir)
    return *req.output_dir;
  if (c.output_dir)
    return *c.output_dir;
  return ".";
}

void print_fits(const RiskReport& r, std::ostream& out)
{
  for (const auto& f : r.fits) {
    out << r.experiment_id << " series " << f.t_index;
    if (f.fitted)
      out << ": slope " << format_double(f.raw.slope) << " (2se "
          << format_double(2.0 * f.raw_se) << ")";
    else
      out << ": too few positive risks for a slope";
    out << "\n";
  }
}

} // namespace

Sample read_sample_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot read sample file '" + path + "'");
  std::vector<double> flat;
  std::size_t d = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty())
      continue;
    std::size_t cols = 0;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const std::string f = trim(field);
      double v = 0.0;
      const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || r.ec != std::errc() || r.ptr != f.data() + f.size())
        throw std::invalid_argument("sample file line " +
                                    std::to_string(line_no) +
                                    ": not a number '" + f + "'");
      flat.push_back(v);
      ++cols;
    }
    if (d == 0)
      d = cols;
    else if (cols != d)
      throw std::invalid_argument("sample file line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(d) +
                                  " columns");
    ++rows;
  }
  if (rows < 2)
    throw std::invalid_argument("n ≥ 2 required");
  return Sample(d, std::move(flat));
}

void estimate_command(const ExperimentConfig& config, std::ostream& out)
{
  const Sample s = read_sample_csv(*config.sample_file);
  const KernelSpec k = make_kernel(config.kernel, s.dims());
  const EstimatorConfig cfg = resolve_estimator(config.estimator, std::nullopt);
  const AdaptiveEstimator est(s, k, cfg);
  const auto& grid = est.grid();
  for (const auto& t : config.points) {
    if (t.size() != s.dims())
      throw std::invalid_argument(
        "dimension mismatch: sample has " + std::to_string(s.dims()) +
        " columns but t has " + std::to_string(t.size()) + " entries");
    const auto [v, tr] = est.evaluate(t);
    out << "t=" << vec_label(t) << " n=" << s.size()
        << " estimate=" << format_double(v) << "\n";
    out << "grid_size=" << grid.size() << " admissible=" << tr.admissible_count()
        << " j_hat=" << index_label(grid.index(tr.chosen))
        << " fallback=" << (tr.fallback_used ? "true" : "false") << "\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      out << "  j=" << index_label(grid.index(i))
          << " sigma_hat=" << format_double(tr.sigma_hat[i])
          << " kde=" << format_double(tr.estimates[i])
          << " admissible=" << (tr.admissible[i] ? 1 : 0)
          << " margin=" << format_double(tr.test_margin[i]) << "\n";
  }
}

int run(const CliRequest& req, std::ostream& out, std::ostream& err)
{
  try {
    const ExperimentConfig c = load_config(req.config_path);
    if (c.command != req.command)
      throw std::invalid_argument("config field 'command': file says '" +
                                  c.command + "' but '" + req.command +
                                  "' was requested");
    const unsigned threads = std::max(1u, req.threads);
    const auto prov = provenance(c);
    const auto dir = output_dir(c, req);

    if (c.command == "estimate") {
      ExperimentConfig local = c;
      const std::filesystem::path sp(*c.sample_file);
      if (sp.is_relative())
        local.sample_file =
          (std::filesystem::path(req.config_path).parent_path() / sp).string();
      estimate_command(local, out);
      return 0;
    }
    if (c.command == "supereff-sim") {
      const auto kernel = make_kernel(c.kernel, 1);
      const auto rep =
        superefficiency_experiment(kernel, make_supereff_options(c, threads));
      const auto paths = write_outputs(dir, c.experiment_id,
                                       supereff_series(rep), prov,
                                       supereff_json(rep));
      for (const auto& r : rep.rows)
        out << "n=" << r.n << " Delta/delta=" << format_double(r.ratio)
            << " risk_p/psi~=" << format_double(r.risk_p_normalized)
            << " risk_q/Delta=" << format_double(r.risk_q_normalized) << "\n";
      out << "wrote " << paths[0].string() << "\n";
      return 0;
    }

    const DensityModel p = make_density(*c.density);
    const KernelSpec kernel = make_kernel(c.kernel, p.dims());
    std::vector<RiskReport> reports;
    std::string extra;
    if (c.command == "risk-sim") {
      reports.push_back(
        risk_experiment(p, kernel, make_risk_options(c, p, threads)));
    } else if (c.command == "support-sim") {
      reports.push_back(
        support_experiment(p, kernel, make_support_options(c, p, threads)));
    } else if (c.command == "calibrate") {
      std::optional<SupportOptions> so;
      if (c.support)
        so = make_support_options(c, p, threads);
      const auto rows =
        calibrate(p, kernel, make_risk_options(c, p, threads),
                  c.calibrate->c3_list, so, c.calibrate->c6_list);
      nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
      for (const auto& row : rows) {
        reports.push_back(row.report);
        sweep.push_back({{"parameter", row.parameter},
                         {"value", row.value},
                         {"experiment_id", row.report.experiment_id}});
      }
      extra = nlohmann::ordered_json{{"sweep", sweep}}.dump();
    }
    const auto paths = write_outputs(dir, c.experiment_id, reports, prov, extra);
    for (const auto& r : reports)
      print_fits(r, out);
    out << "wrote " << paths[0].string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "lodens: error: " << e.what() << "\n";
    return 2;
  }
}

} // namespace lodens
