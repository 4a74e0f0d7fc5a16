#pragma once

#include "lodens/kernels.hpp"
#include "lodens/rng.hpp"
#include "lodens/sample.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lodens {

//! Axis-aligned box prod_i [lower_i, upper_i].
struct Box
{
  std::vector<double> lower;
  std::vector<double> upper;

  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi);
  static Box cube(std::size_t d, double lo, double hi);

  std::size_t dims() const noexcept { return lower.size(); }
  double volume() const;
  double diameter() const;
  bool contains(std::span<const double> x) const;
  bool operator==(const Box&) const = default;
};

//! Anisotropic Holder parameters (beta_i per axis, common constant L).
struct HolderInfo
{
  std::vector<double> beta;
  double L = 0.0;
};

//! lambda({0 < p <= eps}) <= kappa2 eps^gamma for 0 < eps <= kappa1.
struct MarginInfo
{
  double gamma = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};

//! Everything needed to define a test density. Optional members may be left
//! empty; a missing sampler falls back to rejection from the uniform
//! envelope sup_bound on the support box.
struct DensityDefinition
{
  std::string name;
  Box support;
  std::function<double(std::span<const double>)> eval;
  std::function<void(Rng&, std::span<double>)> sampler;
  HolderInfo holder;
  std::optional<MarginInfo> margin;
  double sup_bound = 0.0;
  //! kink locations of the density along each axis (quadrature hints)
  std::vector<std::vector<double>> breakpoints;
  //! 1-d analytic CDF when available
  std::function<double(double)> cdf;
  //! inf over y outside the support of ||t - y||_2
  std::function<double(std::span<const double>)> boundary_distance;
  //! Lebesgue measure of the support {p > 0}
  double support_measure = 0.0;
  //! the support coincides with the support box
  bool support_is_box = false;
};

//! Analytic test density with exact sampler. Immutable and cheap to copy.
class DensityModel
{
public:
  explicit DensityModel(DensityDefinition def);

  const std::string& name() const noexcept { return def_->name; }
  std::size_t dims() const noexcept { return def_->support.dims(); }
  const Box& support_box() const noexcept { return def_->support; }
  const HolderInfo& holder() const noexcept { return def_->holder; }
  const std::optional<MarginInfo>& margin() const noexcept
  {
    return def_->margin;
  }
  double sup_bound() const noexcept { return def_->sup_bound; }
  double support_measure() const noexcept { return def_->support_measure; }
  bool support_is_box() const noexcept { return def_->support_is_box; }
  const std::vector<std::vector<double>>& breakpoints() const noexcept
  {
    return def_->breakpoints;
  }
  bool has_cdf() const noexcept { return static_cast<bool>(def_->cdf); }
  double cdf(double x) const;
  bool has_boundary_distance() const noexcept
  {
    return static_cast<bool>(def_->boundary_distance);
  }
  double boundary_distance(std::span<const double> t) const;

  double operator()(std::span<const double> x) const { return def_->eval(x); }
  double operator()(double x) const { return def_->eval({&x, 1}); }

  //! Writes one draw into `out` (size dims()).
  void draw(Rng& rng, std::span<double> out) const;
  Sample sample(std::size_t n, Rng& rng) const;

private:
  std::shared_ptr<const DensityDefinition> def_;
};

//! p, q pair used to show that adaptation below the regime breakpoint is
//! impossible without knowing the smoothness.
struct SuperefficiencyPair
{
  DensityModel p_n;
  DensityModel q_n;
  double Delta_n;
  double delta_n;
  double g1;
  double g2;
  double h_n;
  double t;
};

DensityModel triangular_density();
DensityModel uniform_density(double lower, double upper);
//! prod_i (1 - |x_i|)_+ on [-1, 1]^d
DensityModel product_triangular_density(std::size_t d);
//! Radial density on the unit ball decaying like dist(x, boundary)^{1/gamma}.
DensityModel margin_family(double beta, double gamma, std::size_t d);
//! `c4` is the risk constant of the adaptive upper bound entering delta_n.
SuperefficiencyPair superefficiency_pair(long long n, double beta1,
                                         double beta2, double t,
                                         double c4 = 0.1);

//! Holder modulus of a univariate function on [lo, hi] over an m-point mesh.
//! For beta > 1 the first-order Taylor remainder is used with the supplied
//! derivative.
double mesh_holder_constant(const std::function<double(double)>& f,
                            const std::function<double(double)>& df,
                            double lo, double hi, double beta,
                            std::size_t m = 1201);

// quadrature oracles

//! E p_hat_{n,h}(t) = int K(u) p(t - h u) du
double oracle_mean(const DensityModel& p, const KernelSpec& k,
                   std::span<const double> h, std::span<const double> t);
//! b_t(h) = p(t) - E p_hat_{n,h}(t)
double oracle_bias(const DensityModel& p, const KernelSpec& k,
                   std::span<const double> h, std::span<const double> t);
//! B_t(h) = L sum_i c9_i h_i^{beta_i}
double bias_bound(const HolderInfo& holder, const KernelSpec& k,
                  std::span<const double> h);
//! sigma_t^2(h) = (1/n) ((K_h)^2 * p)(t)
double oracle_variance(const DensityModel& p, const KernelSpec& k,
                       std::span<const double> h, std::span<const double> t,
                       long long n);
//! lambda({0 < p <= eps}) on a fine grid over the support box.
double margin_volume(const DensityModel& p, double eps);

//! Expectation of g(X) under p by quadrature over the support box.
double oracle_expectation(const DensityModel& p,
                          const std::function<double(std::span<const double>)>& g);

} // namespace lodens
