#include <doctest.h>

#include "oracle_checks.hpp"
#include "lodens/densities.hpp"
#include "lodens/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace lodens;

namespace {

double total_mass(const DensityModel& p)
{
  return oracle_expectation(p, [](std::span<const double>) { return 1.0; });
}

double ks_statistic(const DensityModel& p, std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x)
    v = p.sample(1, rng).row(0)[0];
  std::sort(x.begin(), x.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = p.cdf(x[i]);
    ks = std::max({ks, std::fabs(f - static_cast<double>(i) / n),
                   std::fabs(f - static_cast<double>(i + 1) / n)});
  }
  return ks;
}

} // namespace

TEST_CASE("triangular density")
{
  const auto p = triangular_density();
  CHECK(p(0.0) == 1.0);
  CHECK(p(1.0) == 0.0);
  CHECK(p(-1.0) == 0.0);
  CHECK(p(0.25) == 0.75);
  CHECK(p(3.0) == 0.0);
  CHECK(total_mass(p) == doctest::Approx(1.0).epsilon(1e-6));
  for (double eps : {0.01, 0.1, 0.5})
    CHECK(margin_volume(p, eps) == doctest::Approx(2.0 * eps).epsilon(5e-3));
  CHECK(margin_volume(p, 0.1) == doctest::Approx(0.2).epsilon(2e-2));
  CHECK(margin_volume(p, 2.0) == doctest::Approx(p.support_measure()).epsilon(1e-12));
  CHECK_THROWS(margin_volume(p, 0.0));
}

TEST_CASE("uniform and product families integrate to one")
{
  CHECK(total_mass(uniform_density(-1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(uniform_density(0.0, 3.0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(product_triangular_density(2)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(margin_family(1.0, 0.5, 1)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(margin_family(0.5, 2.0, 1)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(margin_family(2.0, 0.5, 1)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(margin_family(1.0, 1.0, 2)) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS(uniform_density(1.0, 1.0));
}

TEST_CASE("densities vanish outside the support box")
{
  for (const auto& p : {triangular_density(), uniform_density(-0.5, 2.0),
                        margin_family(1.0, 0.5, 1), margin_family(0.5, 2.0, 1)}) {
    const auto& b = p.support_box();
    for (double off : {1e-9, 0.01, 1.0}) {
      CHECK(p(b.lower[0] - off) == 0.0);
      CHECK(p(b.upper[0] + off) == 0.0);
    }
    for (int i = 0; i <= 100; ++i)
      CHECK(p(b.lower[0] + (b.upper[0] - b.lower[0]) * i / 100.0) >= 0.0);
  }
}

TEST_CASE("samplers match analytic cdfs")
{
  for (const auto& p : {triangular_density(), uniform_density(-1.0, 2.0),
                        margin_family(1.0, 0.5, 1), margin_family(0.5, 2.0, 1),
                        margin_family(2.0, 0.5, 1)}) {
    CAPTURE(p.name());
    REQUIRE(p.has_cdf());
    CHECK(ks_statistic(p, 100000, 42) < 0.01);
  }
}

TEST_CASE("sample moments agree with quadrature")
{
  for (const auto& p : {triangular_density(), margin_family(1.0, 0.5, 1),
                        product_triangular_density(2)}) {
    CAPTURE(p.name());
    Rng rng(derive_seed(9, {p.dims()}));
    const std::size_t n = 100000;
    const auto s = p.sample(n, rng);
    for (std::size_t axis = 0; axis < p.dims(); ++axis) {
      const double m1 = oracle_expectation(p, [&](std::span<const double> x) { return x[axis]; });
      const double m2 = oracle_expectation(p, [&](std::span<const double> x) { return x[axis] * x[axis]; });
      const double m4 = oracle_expectation(p, [&](std::span<const double> x) { return std::pow(x[axis], 4); });
      double s1 = 0.0, s2 = 0.0;
      std::size_t outside = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = s.row(i)[axis];
        s1 += v;
        s2 += v * v;
        outside += !p.support_box().contains(s.row(i));
      }
      CHECK(outside == 0);
      s1 /= n;
      s2 /= n;
      const double var = m2 - m1 * m1;
      CHECK(std::fabs(s1 - m1) <= 4.0 * std::sqrt(var / n));
      CHECK(std::fabs(s2 - m2) <= 4.0 * std::sqrt((m4 - m2 * m2) / n));
    }
  }
}

TEST_CASE("margin family")
{
  const auto tri = triangular_density();
  const auto m11 = margin_family(1.0, 1.0, 1);
  for (int i = -12; i <= 12; ++i) {
    const double x = i / 10.0;
    CHECK(m11(x) == doctest::Approx(tri(x)).epsilon(1e-12));
  }

  // (1 - |x|)^2 profile; {p <= eps} has measure 2 (eps/c)^{1/2}
  const auto m = margin_family(1.0, 0.5, 1);
  const double c = m(0.0);
  CHECK(c == doctest::Approx(1.5));
  for (double x : {0.1, 0.5, 0.9, 0.99})
    CHECK(m(x) == doctest::Approx(c * (1 - x) * (1 - x)).epsilon(1e-12));
  CHECK(margin_volume(m, 0.01) == doctest::Approx(2.0 * std::sqrt(0.01 / c)).epsilon(1e-2));
  CHECK(m.margin()->gamma == 0.5);

  // sqrt profile: measure 2 (eps/c)^2
  const auto m2 = margin_family(0.5, 2.0, 1);
  const double c2 = m2(0.0);
  for (double x : {0.3, 0.8})
    CHECK(m2(x) == doctest::Approx(c2 * std::sqrt(1 - x)).epsilon(1e-12));
  CHECK(margin_volume(m2, 0.1) == doctest::Approx(2.0 * std::pow(0.1 / c2, 2.0)).epsilon(2e-2));

  CHECK_THROWS_WITH(margin_family(1.0, 2.0, 1),
                    doctest::Contains("if and only if gamma * beta <= 1"));
  CHECK_THROWS(margin_family(2.5, 0.1, 1));
}

TEST_CASE("recorded margin constants bound the margin volume")
{
  for (const auto& p : {triangular_density(), margin_family(1.0, 0.5, 1),
                        margin_family(0.5, 2.0, 1), margin_family(1.0, 1.0, 2),
                        margin_family(2.0, 0.5, 1)}) {
    CAPTURE(p.name());
    const auto mi = p.margin();
    REQUIRE(mi.has_value());
    for (double eps : {1e-3, 1e-2, 0.1}) {
      const double v = margin_volume(p, eps);
      // below ~50 grid cells the count is resolution noise
      if (eps > mi->kappa1 || v < 1e-4)
        continue;
      CHECK(v <= mi->kappa2 * std::pow(eps, mi->gamma) * 1.02);
    }
  }
}

TEST_CASE("recorded holder constants bound mesh differences")
{
  for (const auto& p : {triangular_density(), margin_family(1.0, 0.5, 1),
                        margin_family(0.5, 2.0, 1)}) {
    const double beta = p.holder().beta[0];
    const double L = p.holder().L;
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i)
      for (int j = i + 1; j <= 400; j += 13) {
        const double x = -1.2 + 2.4 * i / 400.0, y = -1.2 + 2.4 * j / 400.0;
        worst = std::max(worst, std::fabs(p(x) - p(y)) / std::pow(y - x, beta));
      }
    CHECK(worst <= L * (1 + 1e-9));
  }
}

TEST_CASE("superefficiency pair")
{
  const auto pair = superefficiency_pair(10000, 2.0, 0.5, 0.0, 0.01);
  CHECK(pair.Delta_n == doctest::Approx(std::pow(1e4, -1.0 / 3.0)).epsilon(1e-14));
  CHECK(pair.Delta_n == doctest::Approx(0.0464).epsilon(1e-3));
  CHECK(std::fabs(pair.p_n(pair.t) - pair.Delta_n) <= 1e-10);
  CHECK(std::fabs(pair.q_n(pair.t) - pair.delta_n) <= 1e-10);
  CHECK(pair.delta_n < pair.Delta_n);
  CHECK(pair.h_n < pair.g1);
  CHECK(total_mass(pair.p_n) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(pair.q_n) == doctest::Approx(1.0).epsilon(1e-6));
  const auto& b = pair.q_n.support_box();
  for (int i = 0; i <= 20000; ++i)
    CHECK(pair.q_n(b.lower[0] + (b.upper[0] - b.lower[0]) * i / 20000.0) >= 0.0);

  // ratio grows with n
  double prev = 0.0;
  for (long long n : {10000LL, 100000LL, 1000000LL, 10000000LL}) {
    const auto q = superefficiency_pair(n, 2.0, 0.5, 0.0, 0.01);
    CHECK(q.Delta_n / q.delta_n > prev);
    prev = q.Delta_n / q.delta_n;
  }

  CHECK_THROWS_WITH(superefficiency_pair(10000, 2.0, 0.5, 0.0, 0.1),
                    doctest::Contains("delta_n < Delta_n fails"));
  CHECK_NOTHROW(superefficiency_pair(100000000, 2.0, 0.5, 0.0, 0.1));
  CHECK_THROWS(superefficiency_pair(1000, 0.5, 2.0, 0.0));
}

TEST_CASE("bias oracle")
{
  const auto k = KernelSpec::product(UnivariateKernel::triangular(), 1);
  const auto tri = triangular_density();
  const std::vector t0{0.0};
  CHECK(std::fabs(oracle_bias(tri, k, std::vector{1e-4}, t0)) <= 1e-4);
  const auto u = uniform_density(-1.0, 1.0);
  for (double h : {0.1, 0.5, 1.0})
    CHECK(std::fabs(oracle_bias(u, k, std::vector{h}, t0)) < 1e-12);
  // p(0) - int K(u)(1 - h|u|) du = h int |u| K(u) du = h/3
  const double b = oracle_bias(tri, k, std::vector{0.5}, t0);
  CHECK(b == doctest::Approx(0.5 / 3.0).epsilon(1e-7));
  CHECK(std::fabs(b) <= bias_bound(tri.holder(), k, std::vector{0.5}) * (1 + 1e-7));
  CHECK(bias_bound(tri.holder(), k, std::vector{0.5}) == doctest::Approx(0.5 / 3.0));
}

TEST_CASE("variance oracle")
{
  const auto k = KernelSpec::product(UnivariateKernel::triangular(), 1);
  const auto u = uniform_density(-1.0, 1.0);
  const std::vector t0{0.0};
  for (double h : {0.1, 0.7, 1.0})
    CHECK(oracle_variance(u, k, std::vector{h}, t0, 50) ==
          doctest::Approx(k.l2_norm_sq() * 0.5 / (50.0 * h)).epsilon(1e-7));
  const auto tri = triangular_density();
  CHECK(oracle_variance(tri, k, std::vector{0.2}, std::vector{1.5}, 10) == 0.0);
  const double v = oracle_variance(tri, k, std::vector{0.1}, t0, 100);
  const double ref = k.l2_norm_sq() / (100.0 * 0.1);
  CHECK(v >= 0.5 * ref);
  CHECK(v <= 1.5 * ref);
  CHECK_THROWS(oracle_variance(tri, k, std::vector{0.1}, t0, 0));
}

TEST_CASE("variance sandwich below the critical bandwidth")
{
  const auto k = KernelSpec::product(UnivariateKernel::triangular(), 1);
  const std::vector<double> ts{-0.9, -0.7, -0.5, -0.3, -0.1, 0.0, 0.2, 0.4, 0.6, 0.95};
  for (const auto& p : {triangular_density(), margin_family(1.0, 0.5, 1),
                        margin_family(0.5, 2.0, 1)}) {
    CAPTURE(p.name());
    const auto s = testing::variance_sandwich(p, k, ts);
    CHECK(s.count == 50);
    CHECK(s.lo >= 0.5);
    CHECK(s.hi <= 1.5);
  }
}

TEST_CASE("variance near the support boundary")
{
  const auto k = KernelSpec::product(UnivariateKernel::epanechnikov(), 1);
  for (const auto& p : {triangular_density(), margin_family(1.0, 0.5, 1),
                        margin_family(0.5, 2.0, 1)}) {
    CAPTURE(p.name());
    const auto s = testing::boundary_variance(p, k);
    CHECK(s.count == 20);
    CHECK(s.hi <= 1.0);
  }
}

TEST_CASE("bias differences are controlled by the bias bound")
{
  const auto k = KernelSpec::product(UnivariateKernel::triangular(), 2);
  const auto p = product_triangular_density(2);
  for (const auto& t : std::vector<std::vector<double>>{{0.0, 0.0}, {0.5, -0.3}, {0.9, 0.9}, {1.0, 0.0}})
    CHECK(testing::bias_difference_ratio(p, k, t) <= 1.0);
}

TEST_CASE("rejection sampler on the disc")
{
  // radial law proportional to r (1 - r): E r = 1/2, Var r = 1/20
  const auto p = margin_family(1.0, 1.0, 2);
  Rng rng(5);
  const std::size_t n = 40000;
  const auto s = p.sample(n, rng);
  double mean = 0.0;
  std::size_t outside = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::hypot(s.row(i)[0], s.row(i)[1]);
    outside += r > 1.0;
    mean += r;
  }
  mean /= n;
  CHECK(outside == 0);
  CHECK(std::fabs(mean - 0.5) <= 4.0 * std::sqrt(0.05 / n));
}
