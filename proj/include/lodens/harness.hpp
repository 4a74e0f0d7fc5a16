#pragma once

#include "lodens/densities.hpp"
#include "lodens/estimator.hpp"
#include "lodens/kernels.hpp"
#include "lodens/support.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lodens {

struct RateFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;      // ordinary least squares
  std::size_t points = 0;
  std::size_t excluded = 0;   // nonpositive risks dropped
};

//! OLS of ln(risk) on ln(n). Nonpositive risks are excluded; fewer than
//! three usable points throws.
RateFit rate_fit(std::span<const double> n, std::span<const double> risk);

//! Slope standard error when each ln risk carries its own standard error
//! (delta method from the Monte Carlo error of the mean).
double propagated_slope_se(std::span<const double> n,
                           std::span<const double> risk,
                           std::span<const double> risk_se);

enum class EstimatorKind
{
  adaptive,
  classical,
  oracle,
  known_beta,
  truth,
  zero
};

EstimatorKind parse_estimator_kind(const std::string& name);
std::string to_string(EstimatorKind kind);

enum class Normalization
{
  none,
  psi,
  psi_tilde,
  support_rate
};

Normalization parse_normalization(const std::string& name);
std::string to_string(Normalization norm);

struct RiskCell
{
  long long n = 0;
  std::size_t t_index = 0;
  std::vector<double> t;
  std::size_t replicates = 0;
  double truth = 0.0;
  double rate = 1.0;              // normalizing rate at this cell
  double mean_abs_err = 0.0;      // mean |est - truth|^r
  double mean_abs_err_se = 0.0;
  double normalized_risk = 0.0;   // mean (|est - truth| / rate)^r
  double stderr_ = 0.0;           // of normalized_risk
  double fallback_rate = 0.0;     // share of replicates with empty A
};

struct SeriesFit
{
  std::size_t t_index = 0;
  RateFit raw;                 // ln mean_abs_err on ln n
  RateFit normalized;          // ln normalized_risk on ln n
  RateFit log_corrected;       // raw risk divided by (ln n)^{3/2}
  double raw_se = 0.0;         // max(OLS, propagated)
  double normalized_se = 0.0;
  double normalized_growth = 0.0;  // max / min of normalized risk over n
  bool fitted = false;         // fewer than three positive risks otherwise
};

struct RiskReport
{
  std::string experiment_id;
  EstimatorKind kind = EstimatorKind::adaptive;
  Normalization normalization = Normalization::none;
  std::uint64_t seed = 0;
  std::vector<RiskCell> cells;
  std::vector<SeriesFit> fits;
};

struct RiskOptions
{
  std::string experiment_id = "risk";
  EstimatorKind kind = EstimatorKind::adaptive;
  Normalization normalization = Normalization::psi_tilde;
  std::vector<std::vector<double>> points;
  std::vector<long long> n_list;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  EstimatorConfig estimator;
  //! smoothness used by classical / oracle / known-beta and the rates
  std::vector<double> beta;
  double zeta1 = 1.0;
  unsigned threads = 1;
};

RiskReport risk_experiment(const DensityModel& density,
                           const KernelSpec& kernel,
                           const RiskOptions& options);

//! Evaluates one estimator kind on a sample.
double evaluate_estimator(EstimatorKind kind, const Sample& sample,
                          const KernelSpec& kernel, const DensityModel& truth,
                          std::span<const double> t,
                          const EstimatorConfig& config,
                          std::span<const double> beta, double zeta1,
                          bool* fallback = nullptr);

struct SupportOptions
{
  std::string experiment_id = "support";
  EstimatorKind kind = EstimatorKind::adaptive;
  std::vector<long long> n_list;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  Box box;
  std::vector<std::size_t> resolution;
  EstimatorConfig estimator;
  double c6 = 1.0;
  //! smoothness of the class, enters the offset and classical bandwidth
  double beta = 1.0;
  double gamma = 1.0;
  unsigned threads = 1;
};

//! cells carry the mean symmetric difference per n (t is empty)
RiskReport support_experiment(const DensityModel& density,
                              const KernelSpec& kernel,
                              const SupportOptions& options);

struct SuperefficiencyRow
{
  long long n = 0;
  double Delta_n = 0.0;
  double delta_n = 0.0;
  double ratio = 0.0;            // Delta_n / delta_n
  double risk_p = 0.0;           // mean |est - Delta_n| under p_n
  double risk_p_normalized = 0.0;   // by psi_tilde(Delta_n) with beta1
  double risk_q = 0.0;           // mean |est - delta_n| under q_n
  double risk_q_normalized = 0.0;   // by n^{-beta2/(beta2+1)}
  double risk_p_se = 0.0;
  double risk_q_se = 0.0;
};

struct SuperefficiencyReport
{
  std::string experiment_id;
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::uint64_t seed = 0;
  std::vector<SuperefficiencyRow> rows;
  bool ratio_increasing = false;
};

struct SuperefficiencyOptions
{
  std::string experiment_id = "supereff";
  double beta1 = 2.0;
  double beta2 = 0.5;
  double t = 0.0;
  double c4 = 0.1;
  std::vector<long long> n_list;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  EstimatorConfig estimator;   // c1 is replaced by 1.1 sup p_n when <= 0
  unsigned threads = 1;
};

SuperefficiencyReport superefficiency_experiment(
  const KernelSpec& kernel, const SuperefficiencyOptions& options);

struct CalibrationRow
{
  std::string parameter;   // "c3" or "c6"
  double value = 0.0;
  RiskReport report;
};

//! Risk against c3 at the configured points and support error against c6.
std::vector<CalibrationRow> calibrate(const DensityModel& density,
                                      const KernelSpec& kernel,
                                      const RiskOptions& risk,
                                      std::span<const double> c3_list,
                                      const std::optional<SupportOptions>& support,
                                      std::span<const double> c6_list);

struct TailCheck
{
  std::string check;
  long long n = 0;
  double eta = 0.0;
  double t = 0.0;
  double h = 0.0;
  std::size_t replicates = 0;
  double frequency = 0.0;
  double bound = 0.0;
  double slack = 0.0;   // three binomial standard errors at the bound
  bool pass() const { return frequency <= bound + slack; }
};

//! Frequency of |sigma~_trunc^2 / sigma_trunc^2 - 1| >= eta (d = 1).
TailCheck variance_ratio_tail(const DensityModel& p, const KernelSpec& k,
                              double h, double t, long long n, double eta,
                              std::size_t replicates, std::uint64_t seed,
                              unsigned threads = 1);
//! Frequency of |p_hat - E p_hat| >= eta sqrt(sigma_trunc^2 ln n) (d = 1).
TailCheck deviation_tail(const DensityModel& p, const KernelSpec& k, double h,
                         double t, long long n, double eta,
                         std::size_t replicates, std::uint64_t seed,
                         unsigned threads = 1);

//! max(ln^2 n / (n prod h)^2, sigma_t^2(h)) from the quadrature oracle
double oracle_truncated_variance(const DensityModel& p, const KernelSpec& k,
                                 std::span<const double> h,
                                 std::span<const double> t, long long n);

} // namespace lodens
