#include "lodens/kernels.hpp"

#include "lodens/quadrature.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace lodens {

namespace {

constexpr std::array<double, 3> kComponentBreaks{-1.0, 0.0, 1.0};
constexpr double kQuadTol = 1e-11;

} // namespace

UnivariateKernel UnivariateKernel::triangular()
{
  return {KernelProfile::triangular, 1.0, 1.0};
}

UnivariateKernel UnivariateKernel::epanechnikov()
{
  return {KernelProfile::epanechnikov, 2.0, 0.75};
}

UnivariateKernel UnivariateKernel::biweight()
{
  return {KernelProfile::biweight, 2.0, 0.9375};
}

UnivariateKernel UnivariateKernel::power(double exponent)
{
  if (!(exponent > 0.0) || !std::isfinite(exponent))
    throw std::invalid_argument("power kernel exponent must be positive");
  if (exponent == 1.0)
    return triangular();
  return {KernelProfile::power, exponent, (exponent + 1.0) / (2.0 * exponent)};
}

std::string UnivariateKernel::name() const
{
  switch (profile_) {
    case KernelProfile::triangular:
      return "triangular";
    case KernelProfile::epanechnikov:
      return "epanechnikov";
    case KernelProfile::biweight:
      return "biweight";
    case KernelProfile::power:
      return "power(" + std::to_string(exponent_) + ")";
  }
  return "unknown";
}

std::span<const double> UnivariateKernel::breakpoints() noexcept
{
  return kComponentBreaks;
}

double component_integral(const UnivariateKernel& k, double power_of_k,
                          double abs_moment_order)
{
  auto integrand = [&](double u) {
    const double v = k(u);
    const double kv = power_of_k == 1.0 ? v : std::pow(v, power_of_k);
    return abs_moment_order == 0.0
             ? kv
             : kv * std::pow(std::fabs(u), abs_moment_order);
  };
  return quad::integrate(integrand, -1.0, 1.0, kQuadTol, kComponentBreaks);
}

KernelSpec::KernelSpec(std::vector<UnivariateKernel> components,
                       std::optional<HolderModulus> modulus)
  : components_(std::move(components)), modulus_(modulus)
{
  if (components_.empty())
    throw std::invalid_argument("kernel needs at least one component");

  sup_norm_ = 1.0;
  l2_norm_sq_ = 1.0;
  for (const auto& c : components_) {
    const double mass = component_integral(c, 1.0, 0.0);
    if (std::fabs(mass - 1.0) > 1e-9)
      throw std::invalid_argument("kernel component " + c.name() +
                                  " does not integrate to one");
    if (!(c(0.0) > 0.0))
      throw std::invalid_argument("kernel component must be positive at 0");

    double sup = 0.0;
    for (int k = -1000; k <= 1000; ++k)
      sup = std::max(sup, c(k / 1000.0));
    sup_norm_ *= sup;

    const double l2 = component_integral(c, 2.0, 0.0);
    comp_l2_.push_back(l2);
    l2_norm_sq_ *= l2;
    moment1_.push_back(component_integral(c, 1.0, 1.0));
    moment2_.push_back(component_integral(c, 1.0, 2.0));
  }
}

KernelSpec KernelSpec::product(const UnivariateKernel& component,
                               std::size_t d)
{
  if (d == 0)
    throw std::invalid_argument("kernel dimension must be positive");
  return KernelSpec(std::vector<UnivariateKernel>(d, component));
}

double KernelSpec::eval(std::span<const double> x) const
{
  if (x.size() != dims())
    throw std::invalid_argument("kernel evaluated at point of wrong dimension");
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    v *= components_[i](x[i]);
    if (v == 0.0)
      return 0.0;
  }
  return v;
}

double KernelSpec::eval_rescaled(std::span<const double> h,
                                 std::span<const double> x) const
{
  if (h.size() != dims() || x.size() != dims())
    throw std::invalid_argument("rescaled kernel: dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(h[i] > 0.0))
      throw std::invalid_argument("bandwidth components must be positive");
    v *= components_[i](x[i] / h[i]) / h[i];
  }
  return v;
}

double KernelSpec::abs_moment(std::size_t axis, double beta) const
{
  if (!(beta > 0.0))
    throw std::invalid_argument("moment order must be positive");
  if (axis >= dims())
    throw std::out_of_range("kernel axis out of range");
  // components are nonnegative and integrate to one, so the other axes
  // contribute a factor of one
  if (beta == 1.0)
    return moment1_[axis];
  if (beta == 2.0)
    return moment2_[axis];
  return component_integral(components_[axis], 1.0, beta);
}

double KernelSpec::abs_moment_sq(std::size_t axis, double beta) const
{
  if (!(beta > 0.0))
    throw std::invalid_argument("moment order must be positive");
  if (axis >= dims())
    throw std::out_of_range("kernel axis out of range");
  double v = component_integral(components_[axis], 2.0, beta);
  for (std::size_t k = 0; k < dims(); ++k)
    if (k != axis)
      v *= comp_l2_[k];
  return v;
}

KernelSpec holder_kernel(double beta)
{
  if (!(beta > 0.0 && beta <= 2.0))
    throw std::invalid_argument("holder_kernel requires beta in (0, 2]");
  if (beta <= 1.0) {
    auto k = UnivariateKernel::power(beta);
    // ||u|^b - |v|^b| <= |u - v|^b for b <= 1, also across the origin
    return KernelSpec({k}, HolderModulus{beta, k(0.0)});
  }
  // Lipschitz: |d/du 0.75 (1 - u^2)| <= 1.5
  return KernelSpec({UnivariateKernel::epanechnikov()}, HolderModulus{1.0, 1.5});
}

} // namespace lodens
