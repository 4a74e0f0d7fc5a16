#pragma once

#include "lodens/densities.hpp"
#include "lodens/kernels.hpp"
#include "lodens/sample.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace lodens {

using MultiIndex = std::vector<int>;

//! Dyadic bandwidth grid: all j in N_0^d with |j| <= floor(log2(n / ln^2 n)),
//! bandwidths 2^{-j}. Indices are stored in lexicographic order.
class BandwidthGrid
{
public:
  BandwidthGrid(long long n, std::size_t d, bool isotropic);

  long long n() const noexcept { return n_; }
  std::size_t dims() const noexcept { return d_; }
  int max_level() const noexcept { return max_level_; }
  bool isotropic() const noexcept { return isotropic_; }
  std::size_t size() const noexcept { return indices_.size(); }

  const MultiIndex& index(std::size_t k) const { return indices_.at(k); }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
  std::vector<double> bandwidth(std::size_t k) const;
  //! Position of a multi-index, or size() when absent.
  std::size_t find(const MultiIndex& j) const;
  //! Position of the componentwise minimum of indices a and b.
  std::size_t meet(std::size_t a, std::size_t b) const;

private:
  long long n_;
  std::size_t d_;
  int max_level_;
  bool isotropic_;
  std::vector<MultiIndex> indices_;
  std::vector<std::vector<double>> bandwidths_;
};

BandwidthGrid build_grid(long long n, std::size_t d, bool isotropic = false);

//! Tuning constants of the adaptive estimator.
struct EstimatorConfig
{
  double c1 = 1.0;   // cap; upper bound for the density over the class
  double c3 = 4.0;   // admissibility threshold constant
  double r = 1.0;    // risk exponent
  bool isotropic = false;
  //! adaptation rectangle, per-axis [beta_l, beta_u] and [L_l, L_u];
  //! recorded for provenance, not used by the selection rule
  std::vector<std::pair<double, double>> beta_range;
  std::pair<double, double> L_range{0.0, 0.0};

  void validate() const;
  bool operator==(const EstimatorConfig&) const = default;
};

//! Per-point record of the bandwidth selection.
struct SelectionTrace
{
  std::vector<double> sigma_hat;   // truncated variance per grid index
  std::vector<double> estimates;   // kde per grid index
  std::vector<bool> admissible;
  //! min over comparisons of threshold - |difference|; >= 0 iff admissible
  std::vector<double> test_margin;
  std::size_t chosen = 0;
  bool fallback_used = false;

  std::size_t admissible_count() const;
  bool operator==(const SelectionTrace&) const = default;
};

//! (1/n) sum_i K_h(t - X_i)
double kde(const Sample& sample, const KernelSpec& spec,
           std::span<const double> h, std::span<const double> t);

//! (1 / (n^2 prod h_i^2)) sum_i K^2((t - X_i) / h)
double empirical_variance(const Sample& sample, const KernelSpec& spec,
                          std::span<const double> h,
                          std::span<const double> t);

//! min{ max[ln^2 n / (n^2 prod h^2), sigma_tilde^2], ||K||_2^2 c1 / (n prod h) }
double truncated_variance(const Sample& sample, const KernelSpec& spec,
                          std::span<const double> h, std::span<const double> t,
                          const EstimatorConfig& config);

//! Applies the floor and cap of the truncated variance to a raw value.
double truncate_variance(double raw, long long n, double bandwidth_volume,
                         double l2_norm_sq, double c1);

//! Evaluates kde and truncated variance at every grid index and runs the
//! pairwise tests. `chosen` is left unset.
SelectionTrace admissible_set(const Sample& sample, const KernelSpec& spec,
                              const BandwidthGrid& grid,
                              std::span<const double> t,
                              const EstimatorConfig& config);

//! Admissible set plus the arg-min of sigma_hat over it.
SelectionTrace select_bandwidth(const Sample& sample, const KernelSpec& spec,
                                const BandwidthGrid& grid,
                                std::span<const double> t,
                                const EstimatorConfig& config);

//! p_hat_{n, j_hat}(t) capped at c1.
double adaptive_estimate(const Sample& sample, const KernelSpec& spec,
                         std::span<const double> t,
                         const EstimatorConfig& config);

//! Reusable adaptive estimator bound to one sample.
class AdaptiveEstimator
{
public:
  AdaptiveEstimator(const Sample& sample, const KernelSpec& spec,
                    EstimatorConfig config);

  double operator()(std::span<const double> t) const;
  SelectionTrace trace(std::span<const double> t) const;
  //! Estimate together with its trace.
  std::pair<double, SelectionTrace> evaluate(std::span<const double> t) const;

  const BandwidthGrid& grid() const noexcept { return grid_; }
  const EstimatorConfig& config() const noexcept { return config_; }

private:
  const Sample* sample_;
  const KernelSpec* spec_;
  EstimatorConfig config_;
  BandwidthGrid grid_;
};

//! Adaptive estimate set to zero below n^{-bb/(bb+1)} (ln n)^{zeta1},
//! bb the harmonic mean of the known smoothness.
double known_beta_estimate(const Sample& sample, const KernelSpec& spec,
                           std::span<const double> t,
                           const EstimatorConfig& config,
                           std::span<const double> beta, double zeta1);

//! Bandwidth (delta/n)^{1/((2 bb + 1) beta_i)} used by the oracle estimator.
std::vector<double> oracle_bandwidth(long long n, double delta,
                                     std::span<const double> beta);
//! kde at the oracle bandwidth, zero when delta < n^{-bb/(bb+1)}.
double oracle_estimator(const Sample& sample, const KernelSpec& spec,
                        std::span<const double> t, double delta,
                        std::span<const double> beta);

//! Bandwidth n^{-bb/((2 bb + 1) beta_i)} of the non-adaptive baseline.
std::vector<double> classical_bandwidth(long long n,
                                        std::span<const double> beta);
double classical_estimator(const Sample& sample, const KernelSpec& spec,
                           std::span<const double> t,
                           std::span<const double> beta);

//! Constant of the variance sandwich: bandwidths below c8 p(t)^{1/beta_i}
//! keep sigma_t^2(h) within [1/2, 3/2] ||K||^2 p(t) / (n prod h).
double variance_sandwich_constant(const KernelSpec& spec,
                                  std::span<const double> beta, double L);

//! Diagnostic bandwidth bar-h built from the true density value (never used
//! by the estimator itself).
std::vector<double> optimal_bandwidth_diag(const DensityModel& p,
                                           const KernelSpec& spec,
                                           std::span<const double> t,
                                           long long n,
                                           std::span<const double> beta,
                                           double L);
//! Next smaller dyadic exponent: floor(log2(1 / h_i)) + 1.
MultiIndex dyadic_exponents(std::span<const double> h);

} // namespace lodens
