#include "lodens/estimator.hpp"
#include "lodens/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lodens {

namespace {

void enumerate_simplex(std::size_t d, int budget, MultiIndex& cur,
                       std::size_t axis, std::vector<MultiIndex>& out)
{
  if (axis == d) {
    out.push_back(cur);
    return;
  }
  for (int v = 0; v <= budget; ++v) {
    cur[axis] = v;
    enumerate_simplex(d, budget - v, cur, axis + 1, out);
  }
}

struct WindowSums
{
  double k = 0.0;
  double k2 = 0.0;
};

WindowSums window_sums(const Sample& sample, const KernelSpec& spec,
                       std::span<const double> h, std::span<const double> t)
{
  if (t.size() != spec.dims() || h.size() != spec.dims() ||
      sample.dims() != spec.dims())
    throw std::invalid_argument("kernel estimate: dimension mismatch");
  for (double v : h)
    if (!(v > 0.0))
      throw std::invalid_argument("bandwidth components must be positive");

  WindowSums s;
  if (spec.dims() == 1) {
    const auto& k = spec.component(0);
    const auto [first, last] = sample.axis0_range(t[0] - h[0], t[0] + h[0]);
    const double* x = sample.data().data();
    const double inv = 1.0 / h[0];
    for (std::size_t i = first; i < last; ++i) {
      const double v = k((t[0] - x[i]) * inv);
      s.k += v;
      s.k2 += v * v;
    }
    return s;
  }
  sample.for_each_in_window(t, h, [&](std::span<const double> u) {
    double v = 1.0;
    for (std::size_t a = 0; a < u.size(); ++a)
      v *= spec.component(a)(u[a]);
    s.k += v;
    s.k2 += v * v;
  });
  return s;
}

double volume(std::span<const double> h)
{
  double v = 1.0;
  for (double x : h)
    v *= x;
  return v;
}

void require_sample(const Sample& sample, std::size_t n_min)
{
  if (sample.size() < n_min)
    throw std::invalid_argument("n ≥ " + std::to_string(n_min) +
                                " required");
}

} // namespace

BandwidthGrid::BandwidthGrid(long long n, std::size_t d, bool isotropic)
  : n_(n), d_(d), isotropic_(isotropic)
{
  if (d == 0)
    throw std::invalid_argument("grid dimension must be positive");
  if (n < 2)
    throw std::invalid_argument("bandwidth grid needs n >= 2");
  const double ln = std::log(static_cast<double>(n));
  const double ratio = static_cast<double>(n) / (ln * ln);
  if (!(ratio > 1.0))
    throw std::invalid_argument("bandwidth grid needs n / ln^2 n > 1");
  max_level_ = static_cast<int>(std::floor(std::log2(ratio)));

  if (isotropic) {
    const int top = max_level_ / static_cast<int>(d);
    for (int k = 0; k <= top; ++k)
      indices_.emplace_back(d, k);
  } else {
    MultiIndex cur(d, 0);
    enumerate_simplex(d, max_level_, cur, 0, indices_);
    std::sort(indices_.begin(), indices_.end());
  }
  bandwidths_.reserve(indices_.size());
  for (const auto& j : indices_) {
    std::vector<double> h(d);
    for (std::size_t i = 0; i < d; ++i)
      h[i] = std::ldexp(1.0, -j[i]);
    bandwidths_.push_back(std::move(h));
  }
}

std::vector<double> BandwidthGrid::bandwidth(std::size_t k) const
{
  return bandwidths_.at(k);
}

std::size_t BandwidthGrid::find(const MultiIndex& j) const
{
  const auto it = std::lower_bound(indices_.begin(), indices_.end(), j);
  if (it == indices_.end() || *it != j)
    return indices_.size();
  return static_cast<std::size_t>(it - indices_.begin());
}

std::size_t BandwidthGrid::meet(std::size_t a, std::size_t b) const
{
  const auto& ja = indices_.at(a);
  const auto& jb = indices_.at(b);
  MultiIndex m(d_);
  for (std::size_t i = 0; i < d_; ++i)
    m[i] = std::min(ja[i], jb[i]);
  // the simplex and the diagonal are both closed under componentwise min
  return find(m);
}

BandwidthGrid build_grid(long long n, std::size_t d, bool isotropic)
{
  return BandwidthGrid(n, d, isotropic);
}

void EstimatorConfig::validate() const
{
  if (!(c1 > 0.0))
    throw std::invalid_argument("estimator.c1 must be positive");
  if (!(c3 > 0.0))
    throw std::invalid_argument("estimator.c3 must be positive");
  if (!(r >= 1.0))
    throw std::invalid_argument("estimator.r must be >= 1");
  for (const auto& [lo, hi] : beta_range)
    if (!(lo > 0.0 && lo <= hi && hi <= 2.0))
      throw std::invalid_argument(
        "estimator.beta_range must lie in (0, 2] with lower <= upper");
  if (L_range.first < 0.0 || L_range.second < L_range.first)
    throw std::invalid_argument("estimator.L_range must satisfy 0 <= lower <= upper");
}

std::size_t SelectionTrace::admissible_count() const
{
  return static_cast<std::size_t>(
    std::count(admissible.begin(), admissible.end(), true));
}

double kde(const Sample& sample, const KernelSpec& spec,
           std::span<const double> h, std::span<const double> t)
{
  require_sample(sample, 1);
  const auto s = window_sums(sample, spec, h, t);
  return s.k / (static_cast<double>(sample.size()) * volume(h));
}

double empirical_variance(const Sample& sample, const KernelSpec& spec,
                          std::span<const double> h,
                          std::span<const double> t)
{
  require_sample(sample, 1);
  const auto s = window_sums(sample, spec, h, t);
  const double nv = static_cast<double>(sample.size()) * volume(h);
  return s.k2 / (nv * nv);
}

double truncate_variance(double raw, long long n, double bandwidth_volume,
                         double l2_norm_sq, double c1)
{
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);
  const double nv = nn * bandwidth_volume;
  const double floor = ln * ln / (nv * nv);
  const double cap = l2_norm_sq * c1 / nv;
  return std::min(std::max(floor, raw), cap);
}

double truncated_variance(const Sample& sample, const KernelSpec& spec,
                          std::span<const double> h, std::span<const double> t,
                          const EstimatorConfig& config)
{
  require_sample(sample, 2);
  return truncate_variance(empirical_variance(sample, spec, h, t),
                           static_cast<long long>(sample.size()), volume(h),
                           spec.l2_norm_sq(), config.c1);
}

SelectionTrace admissible_set(const Sample& sample, const KernelSpec& spec,
                              const BandwidthGrid& grid,
                              std::span<const double> t,
                              const EstimatorConfig& config)
{
  require_sample(sample, 2);
  if (grid.n() != static_cast<long long>(sample.size()))
    throw std::invalid_argument("bandwidth grid was built for another n");
  if (grid.dims() != spec.dims())
    throw std::invalid_argument("bandwidth grid: dimension mismatch");

  const std::size_t m_count = grid.size();
  const double nn = static_cast<double>(sample.size());
  const double ln = std::log(nn);

  SelectionTrace tr;
  tr.sigma_hat.resize(m_count);
  tr.estimates.resize(m_count);
  tr.admissible.assign(m_count, false);
  tr.test_margin.assign(m_count, std::numeric_limits<double>::infinity());

  for (std::size_t k = 0; k < m_count; ++k) {
    const auto h = grid.bandwidth(k);
    const double v = volume(h);
    const auto s = window_sums(sample, spec, h, t);
    tr.estimates[k] = s.k / (nn * v);
    tr.sigma_hat[k] = truncate_variance(s.k2 / ((nn * v) * (nn * v)),
                                        grid.n(), v, spec.l2_norm_sq(),
                                        config.c1);
  }

  std::vector<double> threshold(m_count);
  for (std::size_t m = 0; m < m_count; ++m)
    threshold[m] = config.c3 * std::sqrt(tr.sigma_hat[m] * ln);

  for (std::size_t j = 0; j < m_count; ++j) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < m_count; ++m) {
      bool compare;
      if (grid.isotropic())
        compare = grid.index(m)[0] >= grid.index(j)[0];
      else
        compare = tr.sigma_hat[m] >= tr.sigma_hat[j];
      if (!compare)
        continue;
      const std::size_t jm = grid.meet(j, m);
      const double diff = std::fabs(tr.estimates[jm] - tr.estimates[m]);
      margin = std::min(margin, threshold[m] - diff);
    }
    tr.test_margin[j] = margin;
    tr.admissible[j] = margin >= 0.0;
  }
  return tr;
}

SelectionTrace select_bandwidth(const Sample& sample, const KernelSpec& spec,
                                const BandwidthGrid& grid,
                                std::span<const double> t,
                                const EstimatorConfig& config)
{
  auto tr = admissible_set(sample, spec, grid, t, config);
  // indices are stored lexicographically, so strict comparisons keep the
  // smallest multi-index among ties
  bool found = false;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!tr.admissible[k])
      continue;
    if (!found || tr.sigma_hat[k] < tr.sigma_hat[tr.chosen]) {
      tr.chosen = k;
      found = true;
    }
  }
  if (!found) {
    tr.fallback_used = true;
    tr.chosen = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
      if (tr.sigma_hat[k] > tr.sigma_hat[tr.chosen])
        tr.chosen = k;
  }
  return tr;
}

double adaptive_estimate(const Sample& sample, const KernelSpec& spec,
                         std::span<const double> t,
                         const EstimatorConfig& config)
{
  return AdaptiveEstimator(sample, spec, config)(t);
}

AdaptiveEstimator::AdaptiveEstimator(const Sample& sample,
                                     const KernelSpec& spec,
                                     EstimatorConfig config)
  : sample_(&sample),
    spec_(&spec),
    config_(std::move(config)),
    grid_(static_cast<long long>(sample.size()), spec.dims(),
          config_.isotropic)
{
  config_.validate();
  if (sample.dims() != spec.dims())
    throw std::invalid_argument("sample and kernel dimensions differ");
}

std::pair<double, SelectionTrace> AdaptiveEstimator::evaluate(
  std::span<const double> t) const
{
  auto tr = select_bandwidth(*sample_, *spec_, grid_, t, config_);
  const double est = std::min(tr.estimates[tr.chosen], config_.c1);
  return {est, std::move(tr)};
}

double AdaptiveEstimator::operator()(std::span<const double> t) const
{
  return evaluate(t).first;
}

SelectionTrace AdaptiveEstimator::trace(std::span<const double> t) const
{
  return evaluate(t).second;
}

double known_beta_estimate(const Sample& sample, const KernelSpec& spec,
                           std::span<const double> t,
                           const EstimatorConfig& config,
                           std::span<const double> beta, double zeta1)
{
  if (!(zeta1 > 0.0))
    throw std::invalid_argument("zeta1 must be positive");
  const double est = adaptive_estimate(sample, spec, t, config);
  const double nn = static_cast<double>(sample.size());
  const double thr = breakpoint(beta, nn) * std::pow(std::log(nn), zeta1);
  return est >= thr ? est : 0.0;
}

std::vector<double> oracle_bandwidth(long long n, double delta,
                                     std::span<const double> beta)
{
  if (!(delta > 0.0))
    throw std::invalid_argument("oracle bandwidth needs delta > 0");
  const double bb = beta_bar(beta);
  std::vector<double> h(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i)
    h[i] = std::pow(delta / static_cast<double>(n),
                    1.0 / ((2.0 * bb + 1.0) * beta[i]));
  return h;
}

double oracle_estimator(const Sample& sample, const KernelSpec& spec,
                        std::span<const double> t, double delta,
                        std::span<const double> beta)
{
  if (!(delta > 0.0))
    throw std::invalid_argument("oracle estimator needs delta > 0");
  const double nn = static_cast<double>(sample.size());
  if (delta < breakpoint(beta, nn))
    return 0.0;
  const auto h = oracle_bandwidth(static_cast<long long>(sample.size()),
                                  delta, beta);
  return kde(sample, spec, h, t);
}

std::vector<double> classical_bandwidth(long long n,
                                        std::span<const double> beta)
{
  const double bb = beta_bar(beta);
  std::vector<double> h(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i)
    h[i] = std::pow(static_cast<double>(n),
                    -(bb / (2.0 * bb + 1.0)) / beta[i]);
  return h;
}

double classical_estimator(const Sample& sample, const KernelSpec& spec,
                           std::span<const double> t,
                           std::span<const double> beta)
{
  const auto h =
    classical_bandwidth(static_cast<long long>(sample.size()), beta);
  return kde(sample, spec, h, t);
}

double variance_sandwich_constant(const KernelSpec& spec,
                                  std::span<const double> beta, double L)
{
  if (beta.size() != spec.dims())
    throw std::invalid_argument("smoothness vector: dimension mismatch");
  if (!(L > 0.0))
    throw std::invalid_argument("Holder constant must be positive");
  const double d = static_cast<double>(spec.dims());
  double c8 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < beta.size(); ++i) {
    const double inner =
      2.0 * d * L / spec.l2_norm_sq() * spec.abs_moment_sq(i, beta[i]);
    c8 = std::min(c8, std::pow(inner, -1.0 / beta[i]));
  }
  return c8;
}

std::vector<double> optimal_bandwidth_diag(const DensityModel& p,
                                           const KernelSpec& spec,
                                           std::span<const double> t,
                                           long long n,
                                           std::span<const double> beta,
                                           double L)
{
  if (t.size() != p.dims())
    throw std::invalid_argument("point and density dimensions differ");
  const double c8 = variance_sandwich_constant(spec, beta, L);
  const double bb = beta_bar(beta);
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);
  const double pt = p(t);
  std::vector<double> h(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i) {
    const double a = std::pow(ln / nn, (bb / (bb + 1.0)) / beta[i]);
    const double b = std::pow(pt * ln / nn, (bb / (2.0 * bb + 1.0)) / beta[i]);
    h[i] = c8 * std::max(a, b);
  }
  return h;
}

MultiIndex dyadic_exponents(std::span<const double> h)
{
  MultiIndex j(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0))
      throw std::invalid_argument("bandwidth components must be positive");
    j[i] = static_cast<int>(std::floor(std::log2(1.0 / h[i]))) + 1;
  }
  return j;
}

} // namespace lodens
