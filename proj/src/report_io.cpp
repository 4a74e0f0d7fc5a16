#include "lodens/report_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace lodens {

using json = nlohmann::ordered_json;

namespace {

std::string header_line(const Provenance& prov)
{
  return "# lodens " + prov.version + " seed=" + std::to_string(prov.seed) +
         " config=" + prov.config_json + "\n";
}

std::string point_label(const std::vector<double>& t)
{
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i)
    s += (i ? ";" : "") + format_double(t[i]);
  return s;
}

json fit_json(const RateFit& f, double se)
{
  json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["r2"] = f.r2;
  j["slope_se"] = se;
  j["slope_ci"] = {f.slope - 2.0 * se, f.slope + 2.0 * se};
  j["points"] = f.points;
  j["excluded"] = f.excluded;
  return j;
}

void write_file(const std::filesystem::path& p, const std::string& content)
{
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write output file " + p.string());
  out << content;
  if (!out)
    throw std::runtime_error("failed writing output file " + p.string());
}

} // namespace

std::string format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string risk_csv(const std::vector<RiskReport>& reports,
                     const Provenance& prov)
{
  std::string s = header_line(prov);
  s += "experiment_id,n,t,replicates,mean_abs_err,normalized_risk,stderr\n";
  for (const auto& rep : reports)
    for (const auto& c : rep.cells)
      s += rep.experiment_id + "," + std::to_string(c.n) + "," +
           point_label(c.t) + "," + std::to_string(c.replicates) + "," +
           format_double(c.mean_abs_err) + "," +
           format_double(c.normalized_risk) + "," + format_double(c.stderr_) +
           "\n";
  return s;
}

std::string plot_tsv(const std::vector<RiskReport>& reports,
                     const Provenance& prov)
{
  std::string s = header_line(prov);
  bool first = true;
  for (const auto& rep : reports) {
    for (std::size_t k = 0; k < rep.fits.size(); ++k) {
      const auto& f = rep.fits[k];
      if (!first)
        s += "\n";
      first = false;
      s += "# series " + rep.experiment_id +
           (rep.fits.size() > 1 ? "_t" + std::to_string(k) : "") +
           "\nlog_n\tlog_risk\n";
      for (const auto& c : rep.cells) {
        if (c.t_index != f.t_index || !(c.mean_abs_err > 0.0))
          continue;
        s += format_double(std::log(static_cast<double>(c.n))) + "\t" +
             format_double(std::log(c.mean_abs_err)) + "\n";
      }
    }
  }
  return s;
}

std::string summary_json(const std::vector<RiskReport>& reports,
                         const Provenance& prov, const std::string& extra_json)
{
  json j;
  j["version"] = prov.version;
  j["seed"] = prov.seed;
  json reps = json::array();
  for (const auto& rep : reports) {
    json r;
    r["experiment_id"] = rep.experiment_id;
    r["estimator"] = to_string(rep.kind);
    r["normalization"] = to_string(rep.normalization);
    json fits = json::array();
    for (const auto& f : rep.fits) {
      json fj;
      fj["t_index"] = f.t_index;
      for (const auto& c : rep.cells)
        if (c.t_index == f.t_index) {
          fj["t"] = c.t;
          break;
        }
      fj["fitted"] = f.fitted;
      if (f.fitted) {
        fj["raw"] = fit_json(f.raw, f.raw_se);
        fj["log_corrected"] = fit_json(f.log_corrected, f.log_corrected.slope_se);
        if (f.normalized.points > 0) {
          fj["normalized"] = fit_json(f.normalized, f.normalized_se);
          fj["normalized_max_over_min"] = f.normalized_growth;
        }
      }
      fits.push_back(fj);
    }
    r["fits"] = fits;
    json cells = json::array();
    for (const auto& c : rep.cells) {
      json cj;
      cj["n"] = c.n;
      cj["t"] = c.t;
      cj["truth"] = c.truth;
      cj["rate"] = c.rate;
      cj["mean_abs_err"] = c.mean_abs_err;
      cj["mean_abs_err_se"] = c.mean_abs_err_se;
      cj["normalized_risk"] = c.normalized_risk;
      cj["stderr"] = c.stderr_;
      cj["fallback_rate"] = c.fallback_rate;
      cells.push_back(cj);
    }
    r["cells"] = cells;
    reps.push_back(r);
  }
  j["reports"] = reps;
  if (!extra_json.empty())
    j["details"] = json::parse(extra_json);
  j["config"] = json::parse(prov.config_json);
  return j.dump(2) + "\n";
}

std::string supereff_json(const SuperefficiencyReport& rep)
{
  json j;
  j["beta1"] = rep.beta1;
  j["beta2"] = rep.beta2;
  j["ratio_increasing"] = rep.ratio_increasing;
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"n", r.n},
                    {"Delta_n", r.Delta_n},
                    {"delta_n", r.delta_n},
                    {"ratio", r.ratio},
                    {"risk_p", r.risk_p},
                    {"risk_p_se", r.risk_p_se},
                    {"risk_p_normalized", r.risk_p_normalized},
                    {"risk_q", r.risk_q},
                    {"risk_q_se", r.risk_q_se},
                    {"risk_q_normalized", r.risk_q_normalized}});
  j["rows"] = rows;
  return j.dump();
}

std::vector<RiskReport> supereff_series(const SuperefficiencyReport& rep)
{
  std::vector<RiskReport> out(2);
  for (int s = 0; s < 2; ++s) {
    auto& r = out[static_cast<std::size_t>(s)];
    r.experiment_id = rep.experiment_id + (s == 0 ? "_p" : "_q");
    r.seed = rep.seed;
    for (const auto& row : rep.rows) {
      RiskCell c;
      c.n = row.n;
      c.truth = s == 0 ? row.Delta_n : row.delta_n;
      c.mean_abs_err = s == 0 ? row.risk_p : row.risk_q;
      c.mean_abs_err_se = s == 0 ? row.risk_p_se : row.risk_q_se;
      c.normalized_risk = s == 0 ? row.risk_p_normalized : row.risk_q_normalized;
      c.rate = c.normalized_risk > 0.0 ? c.mean_abs_err / c.normalized_risk : 1.0;
      c.stderr_ = c.mean_abs_err_se / c.rate;
      r.cells.push_back(c);
    }
    SeriesFit f;
    std::vector<double> n, v, vn;
    for (const auto& c : r.cells) {
      n.push_back(static_cast<double>(c.n));
      v.push_back(c.mean_abs_err);
      vn.push_back(c.normalized_risk);
    }
    try {
      f.raw = rate_fit(n, v);
      f.raw_se = f.raw.slope_se;
      f.normalized = rate_fit(n, vn);
      f.normalized_se = f.normalized.slope_se;
      f.log_corrected = f.raw;
      f.fitted = true;
    } catch (const std::invalid_argument&) {
      f.fitted = false;
    }
    r.fits.push_back(f);
  }
  return out;
}

std::vector<std::filesystem::path> write_outputs(
  const std::filesystem::path& dir, const std::string& id,
  const std::vector<RiskReport>& reports, const Provenance& prov,
  const std::string& extra_json)
{
  std::filesystem::create_directories(dir);
  const std::vector<std::filesystem::path> paths{
    dir / (id + ".csv"), dir / (id + ".summary.json"), dir / (id + ".plot.tsv")};
  write_file(paths[0], risk_csv(reports, prov));
  write_file(paths[1], summary_json(reports, prov, extra_json));
  write_file(paths[2], plot_tsv(reports, prov));
  return paths;
}

} // namespace lodens
