#include <doctest.h>

#include "lodens/estimator.hpp"
#include "lodens/harness.hpp"
#include "lodens/rates.hpp"

#include <algorithm>
#include <cmath>

using namespace lodens;

namespace {

const KernelSpec tri1 = KernelSpec::product(UnivariateKernel::triangular(), 1);
const KernelSpec tri2 = KernelSpec::product(UnivariateKernel::triangular(), 2);

Sample draw(const DensityModel& p, std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  return p.sample(n, rng);
}

EstimatorConfig cfg(double c1, double c3 = 4.0)
{
  EstimatorConfig c;
  c.c1 = c1;
  c.c3 = c3;
  return c;
}

// admissibility written out directly from the set definition
std::vector<bool> reference_admissible(const Sample& s, const KernelSpec& k,
                                       const BandwidthGrid& g,
                                       std::span<const double> t,
                                       const EstimatorConfig& c)
{
  const double ln = std::log(static_cast<double>(s.size()));
  std::vector<double> sig(g.size()), est(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    sig[i] = truncated_variance(s, k, g.bandwidth(i), t, c);
    est[i] = kde(s, k, g.bandwidth(i), t);
  }
  std::vector<bool> a(g.size(), true);
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t m = 0; m < g.size(); ++m) {
      const auto& jj = g.index(j);
      const auto& mm = g.index(m);
      bool compare = sig[m] >= sig[j];
      if (g.isotropic())
        compare = mm[0] >= jj[0];
      if (!compare)
        continue;
      MultiIndex meet(jj.size());
      std::vector<double> h(jj.size());
      for (std::size_t i = 0; i < jj.size(); ++i) {
        meet[i] = std::min(jj[i], mm[i]);
        h[i] = std::ldexp(1.0, -meet[i]);
      }
      if (std::fabs(kde(s, k, h, t) - est[m]) > c.c3 * std::sqrt(sig[m] * ln))
        a[j] = false;
    }
  return a;
}

} // namespace

TEST_CASE("kde examples")
{
  const auto one = Sample(1, {0.3});
  CHECK(kde(one, tri1, std::vector{1.0}, std::vector{0.3}) == 1.0);
  const auto two = Sample(1, {0.0, 0.5});
  CHECK(kde(two, tri1, std::vector{1.0}, std::vector{0.0}) == 0.75);
  CHECK(kde(two, tri1, std::vector{0.1}, std::vector{3.0}) == 0.0);
  // boundary point of the window contributes K(1) = 0
  CHECK(kde(two, tri1, std::vector{0.5}, std::vector{0.0}) == doctest::Approx(0.5 * 2.0));
  CHECK_THROWS(kde(two, tri1, std::vector{1.0, 1.0}, std::vector{0.0}));
  CHECK_THROWS(kde(Sample(), tri1, std::vector{1.0}, std::vector{0.0}));

  const auto s2 = Sample::from_rows({{0.0, 0.0}, {0.5, 0.25}, {0.9, -0.9}});
  // (1/3)(1/(0.5 * 1)) [1 + 0 + 0] and the second point at u = (-1, -0.25)
  CHECK(kde(s2, tri2, std::vector{0.5, 1.0}, std::vector{0.0, 0.0}) == doctest::Approx(2.0 / 3.0));
  CHECK(kde(s2, tri2, std::vector{1.0, 1.0}, std::vector{0.0, 0.0}) ==
        doctest::Approx((1.0 + 0.5 * 0.75 + 0.1 * 0.1) / 3.0));
}

TEST_CASE("kde matches a brute-force sum")
{
  const auto s = draw(product_triangular_density(2), 300, 3);
  std::vector<double> h{0.3, 0.7}, t{0.2, -0.1};
  double ref = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::vector x{t[0] - s.row(i)[0], t[1] - s.row(i)[1]};
    ref += tri2.eval_rescaled(h, x);
  }
  CHECK(kde(s, tri2, h, t) == doctest::Approx(ref / 300.0).epsilon(1e-13));
}

TEST_CASE("empirical variance")
{
  CHECK(empirical_variance(Sample(1, {0.2}), tri1, std::vector{1.0}, std::vector{0.2}) == 1.0);
  CHECK(empirical_variance(Sample(1, {0.2, 0.3}), tri1, std::vector{0.05}, std::vector{-1.0}) == 0.0);
  // (1/(4 h^2)) (1 + 0.25)
  CHECK(empirical_variance(Sample(1, {0.0, 0.5}), tri1, std::vector{1.0}, std::vector{0.0}) ==
        doctest::Approx(1.25 / 4.0));
}

TEST_CASE("empirical variance is unbiased")
{
  const auto p = triangular_density();
  const std::vector h{0.25}, t{0.0};
  const long long n = 50;
  const std::size_t reps = 100000;
  Rng rng(77);
  double m = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double v = empirical_variance(p.sample(n, rng), tri1, h, t);
    m += v;
    m2 += v * v;
  }
  m /= reps;
  const double se = std::sqrt((m2 / reps - m * m) / reps);
  const double truth = oracle_variance(p, tri1, h, t, n);
  CHECK(std::fabs(m - truth) <= 3.0 * se);
}

TEST_CASE("truncated variance")
{
  const auto c = cfg(1.0);
  const Sample two(1, {5.0, 6.0});
  const double ln2 = std::log(2.0);
  CHECK(truncated_variance(two, tri1, std::vector{1.0}, std::vector{0.0}, c) ==
        doctest::Approx(ln2 * ln2 / 4.0).epsilon(1e-15));
  CHECK(truncated_variance(two, tri1, std::vector{1.0}, std::vector{0.0}, c) ==
        doctest::Approx(0.12).epsilon(0.002));

  // identity region: floor < raw < cap
  const auto s = draw(triangular_density(), 2000, 4);
  const std::vector h{0.25}, t{0.1};
  const double raw = empirical_variance(s, tri1, h, t);
  const double ln = std::log(2000.0);
  REQUIRE(raw > ln * ln / std::pow(2000.0 * 0.25, 2));
  REQUIRE(raw < tri1.l2_norm_sq() * 1.0 / (2000.0 * 0.25));
  CHECK(truncated_variance(s, tri1, h, t, c) == raw);

  // all mass at t with a narrow window hits the cap
  const Sample pile(1, std::vector<double>(10, 0.0));
  const std::vector hs{0.125};
  CHECK(empirical_variance(pile, tri1, hs, std::vector{0.0}) == doctest::Approx(10.0 / (100.0 * hs[0] * hs[0])));
  CHECK(truncated_variance(pile, tri1, hs, std::vector{0.0}, c) ==
        doctest::Approx(tri1.l2_norm_sq() * 1.0 / (10.0 * hs[0])).epsilon(1e-15));

  CHECK(truncate_variance(0.0, 2, 1.0, 2.0 / 3.0, 1.0) == doctest::Approx(ln2 * ln2 / 4.0));
  CHECK_THROWS(truncated_variance(Sample(1, {0.0}), tri1, std::vector{1.0}, std::vector{0.0}, c));
}

TEST_CASE("floor and cap bracket the truncated variance")
{
  Rng rng(8);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 2 + (rng() % 400);
    std::vector<double> flat(n);
    for (auto& v : flat)
      v = 2.0 * uniform01(rng) - 1.0;
    const Sample s(1, flat);
    const double h = std::ldexp(1.0, -static_cast<int>(rng() % 8));
    const std::vector t{2.0 * uniform01(rng) - 1.0};
    const double c1 = 0.1 + 3.0 * uniform01(rng);
    const double nn = static_cast<double>(n);
    const double floor = std::pow(std::log(nn) / (nn * h), 2);
    const double cap = tri1.l2_norm_sq() * c1 / (nn * h);
    const double v = truncated_variance(s, tri1, std::vector{h}, t, cfg(c1));
    CHECK(v <= cap);
    CHECK(v >= std::min(floor, cap) * (1.0 - 1e-12));
  }
}

TEST_CASE("dyadic grid")
{
  const auto g = build_grid(1024, 1);
  CHECK(g.max_level() == 4);
  REQUIRE(g.size() == 5);
  for (int j = 0; j <= 4; ++j)
    CHECK(g.index(static_cast<std::size_t>(j)) == MultiIndex{j});
  CHECK(build_grid(8, 1).max_level() == 0);
  CHECK(build_grid(8, 1).size() == 1);

  // n = 2: 2 / ln^2 2 = 4.16
  const auto g2 = build_grid(2, 2);
  CHECK(g2.max_level() == 2);
  std::vector<MultiIndex> want{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 0}};
  CHECK(g2.indices() == want);

  CHECK_THROWS_WITH(build_grid(1, 1), doctest::Contains("n >= 2"));
  CHECK_THROWS(build_grid(0, 1));
}

TEST_CASE("grid size and membership")
{
  for (long long n : {2LL, 100LL, 1000LL, 65536LL, 1000000LL})
    for (std::size_t d : {1u, 2u, 3u}) {
      const auto g = build_grid(n, d);
      const double ln = std::log(static_cast<double>(n));
      const int L = g.max_level();
      CHECK(L == static_cast<int>(std::floor(std::log2(n / (ln * ln)))));
      // C(L + d, d)
      double binom = 1.0;
      for (std::size_t i = 1; i <= d; ++i)
        binom = binom * (L + static_cast<double>(i)) / static_cast<double>(i);
      CHECK(static_cast<double>(g.size()) == binom);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const auto h = g.bandwidth(k);
        double vol = 1.0;
        for (double v : h) {
          CHECK(v <= 1.0);
          vol *= v;
        }
        CHECK(vol >= ln * ln / static_cast<double>(n));
        CHECK(g.find(g.index(k)) == k);
      }
      CHECK(std::is_sorted(g.indices().begin(), g.indices().end()));
      const auto iso = build_grid(n, d, true);
      CHECK(iso.size() == static_cast<std::size_t>(L) / d + 1);
      for (const auto& j : iso.indices())
        CHECK(std::all_of(j.begin(), j.end(), [&](int v) { return v == j[0]; }));
    }
  const auto g = build_grid(1000000, 2);
  const std::size_t a = g.find({3, 1}), b = g.find({1, 4});
  CHECK(g.index(g.meet(a, b)) == MultiIndex{1, 1});
  CHECK(g.find({40, 40}) == g.size());
}

TEST_CASE("single-index grid admits its only index")
{
  const Sample s(1, {0.0, 0.1, 0.4, 0.9, -0.3, 0.2, 0.0, 0.5});
  const auto g = build_grid(8, 1);
  const auto tr = select_bandwidth(s, tri1, g, std::vector{0.0}, cfg(2.0));
  CHECK(tr.admissible == std::vector<bool>{true});
  CHECK(tr.chosen == 0);
  CHECK_FALSE(tr.fallback_used);
}

TEST_CASE("two-cluster sample excludes the coarse bandwidth")
{
  // n = 64: grid {h = 1, 1/2}. Half the points at t, half at 0.75.
  std::vector<double> flat(32, 0.0);
  flat.insert(flat.end(), 32, 0.75);
  const Sample s(1, flat);
  const auto g = build_grid(64, 1);
  REQUIRE(g.size() == 2);
  const std::vector t{0.0};
  const double ln = std::log(64.0);

  // kde: 40/64 at h = 1, 1 at h = 1/2; sigma~: 34/4096, 1/32
  const auto tr1 = admissible_set(s, tri1, g, t, cfg(10.0, 1.0));
  CHECK(tr1.estimates[0] == doctest::Approx(0.625));
  CHECK(tr1.estimates[1] == doctest::Approx(1.0));
  CHECK(tr1.sigma_hat[0] == doctest::Approx(34.0 / 4096.0));
  CHECK(tr1.sigma_hat[1] == doctest::Approx(1.0 / 32.0));
  // |0.625 - 1| = 0.375 > sqrt(ln 64 / 32) = 0.3605
  CHECK(0.375 > std::sqrt(ln / 32.0));
  CHECK(tr1.admissible == std::vector<bool>{false, true});
  CHECK(tr1.test_margin[0] == doctest::Approx(std::sqrt(ln / 32.0) - 0.375));
  CHECK(select_bandwidth(s, tri1, g, t, cfg(10.0, 1.0)).chosen == 1);
  CHECK(adaptive_estimate(s, tri1, t, cfg(10.0, 1.0)) == doctest::Approx(1.0));

  // with c3 = 4 both pass and the larger bandwidth wins
  const auto tr4 = select_bandwidth(s, tri1, g, t, cfg(10.0, 4.0));
  CHECK(tr4.admissible == std::vector<bool>{true, true});
  CHECK(tr4.chosen == 0);
}

TEST_CASE("admissible set matches the set definition")
{
  const auto p = product_triangular_density(2);
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto s = draw(p, 400 + 37 * seed, seed);
    for (bool iso : {false, true}) {
      const auto g = build_grid(static_cast<long long>(s.size()), 2, iso);
      auto c = cfg(1.1, 0.5 + 0.25 * static_cast<double>(seed % 6));
      c.isotropic = iso;
      for (const auto& t : std::vector<std::vector<double>>{{0.0, 0.0}, {0.8, -0.2}, {1.0, 0.5}}) {
        const auto tr = admissible_set(s, tri2, g, t, c);
        CHECK(tr.admissible == reference_admissible(s, tri2, g, t, c));
        for (std::size_t k = 0; k < g.size(); ++k)
          CHECK((tr.test_margin[k] >= 0.0) == tr.admissible[k]);
      }
    }
  }
}

TEST_CASE("index with the largest truncated variance is always admissible")
{
  const auto p = triangular_density();
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto s = draw(p, 200 + 50 * seed, seed);
    const auto g = build_grid(static_cast<long long>(s.size()), 1);
    for (double t : {0.0, 0.5, 0.97, 1.0, 1.3}) {
      const auto tr = admissible_set(s, tri1, g, std::vector{t}, cfg(1.1, 0.2));
      const auto top = std::max_element(tr.sigma_hat.begin(), tr.sigma_hat.end());
      if (std::count(tr.sigma_hat.begin(), tr.sigma_hat.end(), *top) == 1)
        CHECK(tr.admissible[static_cast<std::size_t>(top - tr.sigma_hat.begin())]);
    }
  }
}

TEST_CASE("selection picks the smallest variance with lexicographic ties")
{
  // samples symmetric under swapping axes give equal sigma_hat at (a,b), (b,a)
  Rng rng(21);
  std::size_t ties = 0;
  for (int rep = 0; rep < 150; ++rep) {
    std::vector<std::vector<double>> rows;
    const std::size_t half = 30 + rng() % 60;
    for (std::size_t i = 0; i < half; ++i) {
      const double a = 2.0 * uniform01(rng) - 1.0, b = 2.0 * uniform01(rng) - 1.0;
      rows.push_back({a, b});
      rows.push_back({b, a});
    }
    const Sample s = Sample::from_rows(rows);
    const auto g = build_grid(static_cast<long long>(s.size()), 2);
    const double u = 2.0 * uniform01(rng) - 1.0;
    const std::vector t{u, u};
    const auto tr = select_bandwidth(s, tri2, g, t, cfg(1.0, 0.05 + 0.5 * uniform01(rng)));
    if (tr.fallback_used)
      continue;
    double best = INFINITY;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (tr.admissible[k])
        best = std::min(best, tr.sigma_hat[k]);
    std::size_t first = g.size(), hits = 0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (tr.admissible[k] && tr.sigma_hat[k] == best) {
        first = std::min(first, k);
        ++hits;
      }
    ties += hits > 1;
    CHECK(tr.chosen == first);
    CHECK(tr.admissible[tr.chosen]);
  }
  CHECK(ties > 0);
}

TEST_CASE("monotone variance with every index admissible picks the largest bandwidth")
{
  const auto s = draw(triangular_density(), 5000, 12);
  const auto g = build_grid(5000, 1);
  const auto tr = select_bandwidth(s, tri1, g, std::vector{0.0}, cfg(1.1, 1e6));
  for (std::size_t k = 1; k < g.size(); ++k)
    REQUIRE(tr.sigma_hat[k] > tr.sigma_hat[k - 1]);
  CHECK(tr.admissible_count() == g.size());
  CHECK(tr.chosen == 0);
}

TEST_CASE("adaptive estimate")
{
  CHECK(adaptive_estimate(Sample(1, {0.0, 0.0}), tri1, std::vector{0.0}, cfg(2.0)) == 1.0);
  CHECK(adaptive_estimate(Sample(1, {0.4, 0.5, 0.6}), tri1, std::vector{5.0}, cfg(2.0)) == 0.0);
  // a pile at t drives every kde above the cap
  const Sample pile(1, std::vector<double>(200, 0.0));
  CHECK(adaptive_estimate(pile, tri1, std::vector{0.0}, cfg(0.5)) == 0.5);
  CHECK_THROWS(adaptive_estimate(Sample(1, {0.0}), tri1, std::vector{0.0}, cfg(1.0)));
}

TEST_CASE("adaptive estimate stays in [0, c1] and is deterministic")
{
  const auto p = product_triangular_density(2);
  Rng rng(31);
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto s = draw(p, 100 + 41 * seed, seed);
    const double c1 = 0.2 + 1.5 * uniform01(rng);
    const AdaptiveEstimator est(s, tri2, cfg(c1));
    for (int i = 0; i < 8; ++i) {
      const std::vector t{2.4 * uniform01(rng) - 1.2, 2.4 * uniform01(rng) - 1.2};
      const double v = est(t);
      CHECK(v >= 0.0);
      CHECK(v <= c1);
      CHECK(v == adaptive_estimate(s, tri2, t, cfg(c1)));
      CHECK(est.trace(t) == est.trace(t));
      const auto [v2, tr] = est.evaluate(t);
      CHECK(v2 == v);
      CHECK(v == std::min(c1, tr.estimates[tr.chosen]));
    }
  }
}

TEST_CASE("isotropic and anisotropic rules agree in one dimension")
{
  // the comparison classes coincide when sigma_hat increases along the grid
  const auto p = triangular_density();
  std::size_t compared = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto s = draw(p, 300 + 100 * seed, seed);
    const auto ga = build_grid(static_cast<long long>(s.size()), 1, false);
    const auto gi = build_grid(static_cast<long long>(s.size()), 1, true);
    REQUIRE(ga.indices() == gi.indices());
    for (double t : {0.0, 0.3, 0.8, 1.0, 1.1}) {
      auto ca = cfg(1.1), ci = cfg(1.1);
      ci.isotropic = true;
      const auto ta = select_bandwidth(s, tri1, ga, std::vector{t}, ca);
      const auto ti = select_bandwidth(s, tri1, gi, std::vector{t}, ci);
      if (!std::is_sorted(ta.sigma_hat.begin(), ta.sigma_hat.end()))
        continue;
      ++compared;
      CHECK(ta.chosen == ti.chosen);
      CHECK(ta.admissible == ti.admissible);
    }
  }
  CHECK(compared >= 100);
}

TEST_CASE("known smoothness truncation")
{
  const auto s = draw(triangular_density(), 100, 2);
  const auto c = cfg(1.1);
  const std::vector beta{1.0};
  const double thr = std::pow(100.0, -0.5) * std::log(100.0);
  CHECK(thr == doctest::Approx(0.4605).epsilon(1e-4));
  for (double t : {-0.2, 0.0, 0.6, 0.8, 0.95, 3.0}) {
    const std::vector tv{t};
    const double a = adaptive_estimate(s, tri1, tv, c);
    CHECK(known_beta_estimate(s, tri1, tv, c, beta, 1.0) == (a >= thr ? a : 0.0));
  }
  CHECK(known_beta_estimate(s, tri1, std::vector{3.0}, c, beta, 1.0) == 0.0);
}

TEST_CASE("oracle and classical bandwidths")
{
  CHECK(oracle_bandwidth(1000, 1.0, std::vector{1.0})[0] == doctest::Approx(0.1).epsilon(1e-12));
  const auto h2 = oracle_bandwidth(10000, 1.0, std::vector{1.0, 1.0});
  CHECK(h2[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(h2[1] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(classical_bandwidth(1000, std::vector{1.0})[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(classical_bandwidth(10000, std::vector{1.0, 1.0})[0] == doctest::Approx(0.1).epsilon(1e-12));
  // beta = (2, 1): bb = 2/3, exponent (2/7)/beta_i
  const auto ha = classical_bandwidth(1000, std::vector{2.0, 1.0});
  CHECK(ha[0] == doctest::Approx(std::pow(1000.0, -1.0 / 7.0)));
  CHECK(ha[1] == doctest::Approx(std::pow(1000.0, -2.0 / 7.0)));

  const auto s = draw(triangular_density(), 1000, 5);
  const std::vector beta{1.0};
  // breakpoint n^{-1/2} = 0.0316
  CHECK(oracle_estimator(s, tri1, std::vector{0.0}, 0.03, beta) == 0.0);
  CHECK(oracle_estimator(s, tri1, std::vector{0.0}, 1.0, beta) ==
        kde(s, tri1, std::vector{std::pow(1e-3, 1.0 / 3.0)}, std::vector{0.0}));
  CHECK(classical_estimator(s, tri1, std::vector{0.5}, beta) ==
        kde(s, tri1, std::vector{std::pow(1e-3, 1.0 / 3.0)}, std::vector{0.5}));
}

TEST_CASE("diagnostic bandwidth")
{
  const auto p = triangular_density();
  const std::vector beta{1.0};
  const double c8 = variance_sandwich_constant(tri1, beta, 1.0);
  // (2 L int |x| K^2 / ||K||^2)^{-1} = (2 (1/6) / (2/3))^{-1}
  CHECK(c8 == doctest::Approx(2.0).epsilon(1e-8));
  const long long n = 100000;
  const double ln = std::log(static_cast<double>(n));
  const auto h0 = optimal_bandwidth_diag(p, tri1, std::vector{1.0}, n, beta, 1.0);
  CHECK(h0[0] == doctest::Approx(c8 * std::pow(ln / n, 0.5)));
  const auto hmax = optimal_bandwidth_diag(p, tri1, std::vector{0.0}, n, beta, 1.0);
  CHECK(hmax[0] == doctest::Approx(c8 * std::pow(ln / n, 1.0 / 3.0)));
  CHECK(std::pow(ln / n, 1.0 / 3.0) > std::pow(ln / n, 0.5));

  for (double h : {0.9, 0.5, 0.3, 0.25, 0.01, 1e-5}) {
    const auto j = dyadic_exponents(std::vector{h});
    const double g = std::ldexp(1.0, -j[0]);
    CHECK(g <= h);
    CHECK(g >= h / 2.0);
  }
}

TEST_CASE("oracle variance ordering is bounded over grid pairs")
{
  const auto p = triangular_density();
  const long long n = 4096;
  double worst = 0.0;
  for (double t : {0.0, 0.5, 0.9, 1.0, 1.05}) {
    std::vector<double> v(5);
    for (int j = 0; j < 5; ++j)
      v[static_cast<std::size_t>(j)] = oracle_truncated_variance(p, tri1, std::vector{std::ldexp(1.0, -j)}, std::vector{t}, n);
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t m = 0; m < 5; ++m)
        worst = std::max(worst, v[std::min(j, m)] / std::max(v[j], v[m]));
  }
  MESSAGE("fitted ordering constant " << worst);
  CHECK(worst <= 2.0);

  const auto p2 = product_triangular_density(2);
  double worst2 = 0.0;
  for (const auto& t : std::vector<std::vector<double>>{{0.0, 0.0}, {0.9, 0.2}, {1.0, 1.0}}) {
    std::vector<double> v(25);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        v[static_cast<std::size_t>(5 * a + b)] =
          oracle_truncated_variance(p2, tri2, std::vector{std::ldexp(1.0, -a), std::ldexp(1.0, -b)}, t, n);
    for (int a = 0; a < 25; ++a)
      for (int b = 0; b < 25; ++b) {
        const int meet = 5 * std::min(a / 5, b / 5) + std::min(a % 5, b % 5);
        worst2 = std::max(worst2, v[static_cast<std::size_t>(meet)] /
                                    std::max(v[static_cast<std::size_t>(a)], v[static_cast<std::size_t>(b)]));
      }
  }
  MESSAGE("fitted ordering constant (d = 2) " << worst2);
  CHECK(worst2 <= 2.0);
}

TEST_CASE("estimator config validation")
{
  EstimatorConfig c;
  CHECK_NOTHROW(c.validate());
  c.c1 = 0.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.r = 0.5;
  CHECK_THROWS(c.validate());
  c = {};
  c.beta_range = {{0.5, 2.5}};
  CHECK_THROWS(c.validate());
}
