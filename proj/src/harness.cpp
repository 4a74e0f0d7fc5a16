#include "lodens/harness.hpp"
#include "lodens/parallel.hpp"
#include "lodens/rates.hpp"
#include "lodens/report_io.hpp"
#include "lodens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lodens {

namespace {

struct MeanSe
{
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> v)
{
  MeanSe m;
  if (v.empty())
    return m;
  for (double x : v)
    m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v)
      ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) /
                     static_cast<double>(v.size()));
  }
  return m;
}

double normalized(double err, double rate)
{
  if (rate > 0.0)
    return err / rate;
  return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

std::vector<double> repeat_beta(std::span<const double> beta, std::size_t d)
{
  if (beta.empty())
    return std::vector<double>(d, 1.0);
  if (beta.size() == d)
    return {beta.begin(), beta.end()};
  if (beta.size() == 1)
    return std::vector<double>(d, beta[0]);
  throw std::invalid_argument("smoothness vector: dimension mismatch");
}

SeriesFit fit_series(const std::vector<const RiskCell*>& cells,
                     double log_power)
{
  SeriesFit f;
  std::vector<double> n, raw, raw_se, nr, nr_se, lc;
  for (const auto* c : cells) {
    n.push_back(static_cast<double>(c->n));
    raw.push_back(c->mean_abs_err);
    raw_se.push_back(c->mean_abs_err_se);
    nr.push_back(std::isfinite(c->normalized_risk) ? c->normalized_risk : 0.0);
    nr_se.push_back(c->stderr_);
    lc.push_back(c->mean_abs_err /
                 std::pow(std::log(static_cast<double>(c->n)), log_power));
  }
  const auto positive = [](const std::vector<double>& v) {
    return std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; });
  };
  if (positive(raw) < 3)
    return f;
  f.fitted = true;
  f.raw = rate_fit(n, raw);
  f.log_corrected = rate_fit(n, lc);
  f.raw_se = std::max(f.raw.slope_se, propagated_slope_se(n, raw, raw_se));
  if (positive(nr) >= 3) {
    f.normalized = rate_fit(n, nr);
    f.normalized_se =
      std::max(f.normalized.slope_se, propagated_slope_se(n, nr, nr_se));
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double x : nr) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    f.normalized_growth = lo > 0.0 ? hi / lo
                                   : std::numeric_limits<double>::infinity();
  }
  return f;
}

void require_replicates(std::size_t r)
{
  if (r < 2)
    throw std::invalid_argument("replicates must be >= 2");
}

} // namespace

RateFit rate_fit(std::span<const double> n, std::span<const double> risk)
{
  if (n.size() != risk.size())
    throw std::invalid_argument("rate fit: size mismatch");
  RateFit f;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(risk[i] > 0.0) || !std::isfinite(risk[i]) || !(n[i] > 0.0)) {
      ++f.excluded;
      continue;
    }
    x.push_back(std::log(n[i]));
    y.push_back(std::log(risk[i]));
  }
  f.points = x.size();
  if (f.points < 3)
    throw std::invalid_argument("rate fit needs at least 3 positive risks");
  const double m = static_cast<double>(f.points);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("rate fit needs at least two distinct n");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.slope_se = std::sqrt(ss_res / (m - 2.0) / sxx);
  return f;
}

double propagated_slope_se(std::span<const double> n,
                           std::span<const double> risk,
                           std::span<const double> risk_se)
{
  std::vector<double> x, v;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(risk[i] > 0.0) || !std::isfinite(risk[i]))
      continue;
    x.push_back(std::log(n[i]));
    const double rel = risk_se[i] / risk[i];
    v.push_back(rel * rel);
  }
  if (x.size() < 2)
    return 0.0;
  double mx = 0.0;
  for (double xi : x)
    mx += xi;
  mx /= static_cast<double>(x.size());
  double sxx = 0.0;
  for (double xi : x)
    sxx += (xi - mx) * (xi - mx);
  if (!(sxx > 0.0))
    return 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = (x[i] - mx) / sxx;
    var += w * w * v[i];
  }
  return std::sqrt(var);
}

EstimatorKind parse_estimator_kind(const std::string& name)
{
  if (name == "adaptive")
    return EstimatorKind::adaptive;
  if (name == "classical")
    return EstimatorKind::classical;
  if (name == "oracle")
    return EstimatorKind::oracle;
  if (name == "known_beta")
    return EstimatorKind::known_beta;
  if (name == "truth")
    return EstimatorKind::truth;
  if (name == "zero")
    return EstimatorKind::zero;
  throw std::invalid_argument("unknown estimator kind '" + name + "'");
}

std::string to_string(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::adaptive:
      return "adaptive";
    case EstimatorKind::classical:
      return "classical";
    case EstimatorKind::oracle:
      return "oracle";
    case EstimatorKind::known_beta:
      return "known_beta";
    case EstimatorKind::truth:
      return "truth";
    case EstimatorKind::zero:
      return "zero";
  }
  return "unknown";
}

Normalization parse_normalization(const std::string& name)
{
  if (name == "none")
    return Normalization::none;
  if (name == "psi")
    return Normalization::psi;
  if (name == "psi_tilde")
    return Normalization::psi_tilde;
  if (name == "support_rate")
    return Normalization::support_rate;
  throw std::invalid_argument("unknown normalization '" + name + "'");
}

std::string to_string(Normalization norm)
{
  switch (norm) {
    case Normalization::none:
      return "none";
    case Normalization::psi:
      return "psi";
    case Normalization::psi_tilde:
      return "psi_tilde";
    case Normalization::support_rate:
      return "support_rate";
  }
  return "unknown";
}

double evaluate_estimator(EstimatorKind kind, const Sample& sample,
                          const KernelSpec& kernel, const DensityModel& truth,
                          std::span<const double> t,
                          const EstimatorConfig& config,
                          std::span<const double> beta, double zeta1,
                          bool* fallback)
{
  const auto b = repeat_beta(beta, t.size());
  switch (kind) {
    case EstimatorKind::adaptive: {
      const AdaptiveEstimator est(sample, kernel, config);
      auto [v, tr] = est.evaluate(t);
      if (fallback)
        *fallback = tr.fallback_used;
      return v;
    }
    case EstimatorKind::classical:
      return classical_estimator(sample, kernel, t, b);
    case EstimatorKind::oracle: {
      const double delta = truth(t);
      // the indicator switches the oracle off for delta = 0
      if (!(delta > 0.0))
        return 0.0;
      return oracle_estimator(sample, kernel, t, delta, b);
    }
    case EstimatorKind::known_beta:
      return known_beta_estimate(sample, kernel, t, config, b, zeta1);
    case EstimatorKind::truth:
      return truth(t);
    case EstimatorKind::zero:
      return 0.0;
  }
  throw std::invalid_argument("unknown estimator kind");
}

RiskReport risk_experiment(const DensityModel& density,
                           const KernelSpec& kernel,
                           const RiskOptions& options)
{
  require_replicates(options.replicates);
  if (options.n_list.empty())
    throw std::invalid_argument("n_list must not be empty");
  if (options.points.empty())
    throw std::invalid_argument("points must not be empty");
  for (const auto& t : options.points)
    if (t.size() != density.dims())
      throw std::invalid_argument("evaluation point dimension differs from density");
  if (kernel.dims() != density.dims())
    throw std::invalid_argument("kernel dimension differs from density");
  options.estimator.validate();

  const auto beta = repeat_beta(options.beta, density.dims());
  const std::size_t nn = options.n_list.size();
  const std::size_t nt = options.points.size();
  const std::size_t R = options.replicates;
  const double r = options.estimator.r;
  const bool needs_sample = options.kind != EstimatorKind::truth &&
                            options.kind != EstimatorKind::zero;

  std::vector<double> err(nn * nt * R);
  std::vector<char> fb(nn * nt * R, 0);
  parallel_for(err.size(), options.threads, [&](std::size_t u) {
    const std::size_t rep = u % R;
    const std::size_t ti = (u / R) % nt;
    const std::size_t ni = u / (R * nt);
    const long long n = options.n_list[ni];
    const auto& t = options.points[ti];
    double est;
    if (needs_sample) {
      Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(n), ti, rep}));
      const Sample s = density.sample(static_cast<std::size_t>(n), rng);
      bool f = false;
      est = evaluate_estimator(options.kind, s, kernel, density, t,
                               options.estimator, beta, options.zeta1, &f);
      fb[u] = f;
    } else {
      est = evaluate_estimator(options.kind, Sample(), kernel, density, t,
                               options.estimator, beta, options.zeta1);
    }
    err[u] = std::fabs(est - density(t));
  });

  RiskReport rep;
  rep.experiment_id = options.experiment_id;
  rep.kind = options.kind;
  rep.normalization = options.normalization;
  rep.seed = options.seed;
  for (std::size_t ni = 0; ni < nn; ++ni) {
    for (std::size_t ti = 0; ti < nt; ++ti) {
      RiskCell c;
      c.n = options.n_list[ni];
      c.t_index = ti;
      c.t = options.points[ti];
      c.replicates = R;
      c.truth = density(c.t);
      const double n = static_cast<double>(c.n);
      switch (options.normalization) {
        case Normalization::none:
          c.rate = 1.0;
          break;
        case Normalization::psi:
          c.rate = rate_psi(c.truth, beta, n);
          break;
        case Normalization::psi_tilde:
          c.rate = rate_psi_tilde(c.truth, beta, n);
          break;
        case Normalization::support_rate:
          throw std::invalid_argument(
            "support_rate normalization applies to support experiments");
      }
      std::vector<double> raw(R), nr(R);
      std::size_t fallbacks = 0;
      for (std::size_t k = 0; k < R; ++k) {
        const std::size_t u = (ni * nt + ti) * R + k;
        raw[k] = std::pow(err[u], r);
        nr[k] = std::pow(normalized(err[u], c.rate), r);
        fallbacks += fb[u] ? 1 : 0;
      }
      const auto a = mean_se(raw);
      const auto b = mean_se(nr);
      c.mean_abs_err = a.mean;
      c.mean_abs_err_se = a.se;
      c.normalized_risk = b.mean;
      c.stderr_ = b.se;
      c.fallback_rate = static_cast<double>(fallbacks) / static_cast<double>(R);
      rep.cells.push_back(std::move(c));
    }
  }
  for (std::size_t ti = 0; ti < nt; ++ti) {
    std::vector<const RiskCell*> series;
    for (const auto& c : rep.cells)
      if (c.t_index == ti)
        series.push_back(&c);
    auto f = fit_series(series, 1.5);
    f.t_index = ti;
    rep.fits.push_back(f);
  }
  return rep;
}

RiskReport support_experiment(const DensityModel& density,
                              const KernelSpec& kernel,
                              const SupportOptions& options)
{
  require_replicates(options.replicates);
  if (options.n_list.empty())
    throw std::invalid_argument("n_list must not be empty");
  if (!density.margin())
    throw std::invalid_argument("support experiment needs margin metadata");
  if (options.box.dims() != density.dims())
    throw std::invalid_argument("support box dimension differs from density");
  if (options.kind != EstimatorKind::adaptive &&
      options.kind != EstimatorKind::classical)
    throw std::invalid_argument(
      "support experiment supports adaptive and classical estimators");
  options.estimator.validate();

  const std::size_t d = density.dims();
  const std::vector<double> beta(d, options.beta);
  const std::size_t nn = options.n_list.size();
  const std::size_t R = options.replicates;

  std::vector<double> dist(nn * R);
  parallel_for(dist.size(), options.threads, [&](std::size_t u) {
    const std::size_t rep = u % R;
    const long long n = options.n_list[u / R];
    Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(n), 0, rep}));
    const Sample s = density.sample(static_cast<std::size_t>(n), rng);
    const double alpha = offset_level(static_cast<double>(n), options.beta,
                                      static_cast<int>(d), options.c6);
    GridSet est;
    if (options.kind == EstimatorKind::adaptive) {
      est = plugin_support(s, kernel, options.estimator, options.box,
                           options.resolution, alpha);
    } else {
      const auto h = classical_bandwidth(n, beta);
      est = plugin_support(
        [&](std::span<const double> x) { return kde(s, kernel, h, x); },
        options.box, options.resolution, alpha);
    }
    dist[u] = support_error(est, density);
  });

  RiskReport rep;
  rep.experiment_id = options.experiment_id;
  rep.kind = options.kind;
  rep.normalization = Normalization::support_rate;
  rep.seed = options.seed;
  for (std::size_t ni = 0; ni < nn; ++ni) {
    RiskCell c;
    c.n = options.n_list[ni];
    c.replicates = R;
    c.rate = support_rate(options.beta, options.gamma, static_cast<int>(d),
                          static_cast<double>(c.n));
    std::span<const double> v(dist.data() + ni * R, R);
    const auto a = mean_se(v);
    c.mean_abs_err = a.mean;
    c.mean_abs_err_se = a.se;
    c.normalized_risk = a.mean / c.rate;
    c.stderr_ = a.se / c.rate;
    rep.cells.push_back(std::move(c));
  }
  std::vector<const RiskCell*> series;
  for (const auto& c : rep.cells)
    series.push_back(&c);
  rep.fits.push_back(fit_series(series, 2.0 * options.gamma));
  return rep;
}

SuperefficiencyReport superefficiency_experiment(
  const KernelSpec& kernel, const SuperefficiencyOptions& options)
{
  require_replicates(options.replicates);
  if (options.n_list.empty())
    throw std::invalid_argument("n_list must not be empty");
  if (kernel.dims() != 1)
    throw std::invalid_argument("superefficiency pair is univariate");

  SuperefficiencyReport rep;
  rep.experiment_id = options.experiment_id;
  rep.beta1 = options.beta1;
  rep.beta2 = options.beta2;
  rep.seed = options.seed;
  const std::size_t R = options.replicates;
  const double t = options.t;
  const std::vector<double> b1{options.beta1};

  for (const long long n : options.n_list) {
    const auto pair = superefficiency_pair(n, options.beta1, options.beta2, t,
                                           options.c4);
    EstimatorConfig cfg = options.estimator;
    const double c1 =
      1.1 * std::max(pair.p_n.sup_bound(), pair.q_n.sup_bound());
    if (cfg.c1 <= 0.0)
      cfg.c1 = c1;
    cfg.validate();

    std::vector<double> ep(R), eq(R);
    parallel_for(2 * R, options.threads, [&](std::size_t u) {
      const std::size_t rep_i = u % R;
      const bool under_q = u >= R;
      const auto& model = under_q ? pair.q_n : pair.p_n;
      Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(n),
                                         under_q ? 1u : 0u, rep_i}));
      const Sample s = model.sample(static_cast<std::size_t>(n), rng);
      const double est = adaptive_estimate(s, kernel, {&t, 1}, cfg);
      const double truth = under_q ? pair.delta_n : pair.Delta_n;
      (under_q ? eq : ep)[rep_i] = std::fabs(est - truth);
    });
    SuperefficiencyRow row;
    row.n = n;
    row.Delta_n = pair.Delta_n;
    row.delta_n = pair.delta_n;
    row.ratio = pair.Delta_n / pair.delta_n;
    const auto a = mean_se(ep);
    const auto b = mean_se(eq);
    row.risk_p = a.mean;
    row.risk_p_se = a.se;
    row.risk_q = b.mean;
    row.risk_q_se = b.se;
    row.risk_p_normalized =
      a.mean / rate_psi_tilde(pair.Delta_n, b1, static_cast<double>(n));
    row.risk_q_normalized =
      b.mean / std::pow(static_cast<double>(n),
                        -options.beta2 / (options.beta2 + 1.0));
    rep.rows.push_back(row);
  }
  rep.ratio_increasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].ratio > rep.rows[i - 1].ratio))
      rep.ratio_increasing = false;
  return rep;
}

std::vector<CalibrationRow> calibrate(const DensityModel& density,
                                      const KernelSpec& kernel,
                                      const RiskOptions& risk,
                                      std::span<const double> c3_list,
                                      const std::optional<SupportOptions>& support,
                                      std::span<const double> c6_list)
{
  std::vector<CalibrationRow> rows;
  for (double c3 : c3_list) {
    RiskOptions o = risk;
    o.estimator.c3 = c3;
    o.experiment_id = risk.experiment_id + "_c3_" + format_double(c3);
    rows.push_back({"c3", c3, risk_experiment(density, kernel, o)});
  }
  if (support) {
    for (double c6 : c6_list) {
      SupportOptions o = *support;
      o.c6 = c6;
      o.experiment_id = support->experiment_id + "_c6_" + format_double(c6);
      rows.push_back({"c6", c6, support_experiment(density, kernel, o)});
    }
  }
  return rows;
}

double oracle_truncated_variance(const DensityModel& p, const KernelSpec& k,
                                 std::span<const double> h,
                                 std::span<const double> t, long long n)
{
  double vol = 1.0;
  for (double x : h)
    vol *= x;
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);
  const double floor = ln * ln / ((nn * vol) * (nn * vol));
  return std::max(floor, oracle_variance(p, k, h, t, n));
}

TailCheck variance_ratio_tail(const DensityModel& p, const KernelSpec& k,
                              double h, double t, long long n, double eta,
                              std::size_t replicates, std::uint64_t seed,
                              unsigned threads)
{
  require_replicates(replicates);
  const std::span<const double> hs(&h, 1), ts(&t, 1);
  const double target = oracle_truncated_variance(p, k, hs, ts, n);
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);
  const double floor = ln * ln / ((nn * h) * (nn * h));
  std::vector<char> hit(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t rep) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n), 0, rep}));
    const Sample s = p.sample(static_cast<std::size_t>(n), rng);
    const double v = std::max(floor, empirical_variance(s, k, hs, ts));
    hit[rep] = std::fabs(v / target - 1.0) >= eta;
  });
  TailCheck c;
  c.check = "variance_ratio";
  c.n = n;
  c.eta = eta;
  c.t = t;
  c.h = h;
  c.replicates = replicates;
  c.frequency = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) /
                static_cast<double>(replicates);
  const double ks = k.sup_norm();
  c.bound =
    2.0 * std::exp(-3.0 * eta * eta * ln * ln / (2.0 * (3.0 + 2.0 * eta) * ks * ks));
  const double q = std::min(c.bound, 1.0);
  c.slack = 3.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(replicates));
  return c;
}

TailCheck deviation_tail(const DensityModel& p, const KernelSpec& k, double h,
                         double t, long long n, double eta,
                         std::size_t replicates, std::uint64_t seed,
                         unsigned threads)
{
  require_replicates(replicates);
  const std::span<const double> hs(&h, 1), ts(&t, 1);
  const double mean = oracle_mean(p, k, hs, ts);
  const double ln = std::log(static_cast<double>(n));
  const double scale =
    std::sqrt(oracle_truncated_variance(p, k, hs, ts, n) * ln);
  std::vector<char> hit(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t rep) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n), 1, rep}));
    const Sample s = p.sample(static_cast<std::size_t>(n), rng);
    hit[rep] = std::fabs(kde(s, k, hs, ts) - mean) / scale >= eta;
  });
  TailCheck c;
  c.check = "deviation";
  c.n = n;
  c.eta = eta;
  c.t = t;
  c.h = h;
  c.replicates = replicates;
  c.frequency = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) /
                static_cast<double>(replicates);
  c.bound = 2.0 * std::exp(-ln / 4.0 * std::min(eta * eta, eta));
  const double q = std::min(c.bound, 1.0);
  c.slack = 3.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(replicates));
  return c;
}

} // namespace lodens
