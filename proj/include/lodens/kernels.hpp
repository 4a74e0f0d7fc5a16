#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lodens {

enum class KernelProfile
{
  triangular,   // (1 - |u|)
  epanechnikov, // 0.75 (1 - u^2)
  biweight,     // 15/16 (1 - u^2)^2
  power         // c (1 - |u|^a), c = (a + 1) / (2a)
};

//! Symmetric, nonnegative univariate kernel supported on [-1, 1].
class UnivariateKernel
{
public:
  static UnivariateKernel triangular();
  static UnivariateKernel epanechnikov();
  static UnivariateKernel biweight();
  //! c (1 - |u|^a)_+ normalized to integrate to one; a = 1 is triangular.
  static UnivariateKernel power(double exponent);

  double operator()(double u) const noexcept
  {
    const double a = std::fabs(u);
    if (a > 1.0)
      return 0.0;
    switch (profile_) {
      case KernelProfile::triangular:
        return 1.0 - a;
      case KernelProfile::epanechnikov:
        return 0.75 * (1.0 - a * a);
      case KernelProfile::biweight: {
        const double s = 1.0 - a * a;
        return 0.9375 * s * s;
      }
      case KernelProfile::power:
        return scale_ * (1.0 - std::pow(a, exponent_));
    }
    return 0.0;
  }

  KernelProfile profile() const noexcept { return profile_; }
  double exponent() const noexcept { return exponent_; }
  std::string name() const;

  //! Kinks of the component (support edges and the origin).
  static std::span<const double> breakpoints() noexcept;

  bool operator==(const UnivariateKernel&) const = default;

private:
  UnivariateKernel(KernelProfile p, double exponent, double scale)
    : profile_(p), exponent_(exponent), scale_(scale)
  {}

  KernelProfile profile_;
  double exponent_;
  double scale_;
};

//! |K(u) - K(v)| <= constant * |u - v|^exponent.
struct HolderModulus
{
  double exponent;
  double constant;
};

//! Product kernel K(x) = prod_i K_i(x_i) on [-1, 1]^d with cached norms.
//!
//! Immutable after construction.
class KernelSpec
{
public:
  explicit KernelSpec(std::vector<UnivariateKernel> components,
                      std::optional<HolderModulus> modulus = std::nullopt);

  //! The same component on every axis.
  static KernelSpec product(const UnivariateKernel& component, std::size_t d);

  std::size_t dims() const noexcept { return components_.size(); }
  const UnivariateKernel& component(std::size_t axis) const
  {
    return components_.at(axis);
  }

  //! ||K||_sup
  double sup_norm() const noexcept { return sup_norm_; }
  //! ||K||_2^2
  double l2_norm_sq() const noexcept { return l2_norm_sq_; }
  //! int K_i(u)^2 du for one axis.
  double component_l2_sq(std::size_t axis) const { return comp_l2_.at(axis); }

  double eval(std::span<const double> x) const;
  //! (prod h_i)^{-1} K(x_1/h_1, ..., x_d/h_d)
  double eval_rescaled(std::span<const double> h,
                       std::span<const double> x) const;

  //! int |x_i|^beta |K(x)| dx. Orders 1 and 2 are cached.
  double abs_moment(std::size_t axis, double beta) const;
  //! int |x_i|^beta K(x)^2 dx
  double abs_moment_sq(std::size_t axis, double beta) const;

  const std::optional<HolderModulus>& holder_modulus() const noexcept
  {
    return modulus_;
  }

  bool operator==(const KernelSpec& o) const
  {
    return components_ == o.components_;
  }

private:
  std::vector<UnivariateKernel> components_;
  std::optional<HolderModulus> modulus_;
  double sup_norm_ = 0.0;
  double l2_norm_sq_ = 0.0;
  std::vector<double> comp_l2_;
  std::vector<double> moment1_;
  std::vector<double> moment2_;
};

//! Univariate kernel whose Holder modulus matches exponent beta in (0, 2]:
//! the normalized (1 - |u|^beta)_+ family for beta <= 1 and Epanechnikov
//! above.
KernelSpec holder_kernel(double beta);

//! Univariate quadrature of a component, used by tests and the cache.
double component_integral(const UnivariateKernel& k, double power_of_k,
                          double abs_moment_order);

} // namespace lodens
