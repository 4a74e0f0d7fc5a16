#include "lodens/densities.hpp"

#include "lodens/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace lodens {

namespace {

constexpr double kOracleTol = 1e-10;

double norm2(std::span<const double> x)
{
  double s = 0.0;
  for (double v : x)
    s += v * v;
  return std::sqrt(s);
}

//! Volume of the Euclidean unit ball in R^d.
double unit_ball_volume(std::size_t d)
{
  const double hd = 0.5 * static_cast<double>(d);
  return std::pow(std::numbers::pi, hd) / std::tgamma(hd + 1.0);
}

//! Surface area of the unit sphere S^{d-1}.
double unit_sphere_area(std::size_t d)
{
  const double hd = 0.5 * static_cast<double>(d);
  return 2.0 * std::pow(std::numbers::pi, hd) / std::tgamma(hd);
}

double beta_fn(double a, double b)
{
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

std::function<void(Rng&, std::span<double>)>
rejection_sampler(std::function<double(std::span<const double>)> eval,
                  Box box, double envelope)
{
  return [eval = std::move(eval), box = std::move(box), envelope](
           Rng& rng, std::span<double> out) {
    const std::size_t d = box.dims();
    for (;;) {
      for (std::size_t k = 0; k < d; ++k)
        out[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * uniform01(rng);
      if (uniform01(rng) * envelope < eval(out))
        return;
    }
  };
}

//! Breakpoints of u -> p(t - h u) on [-1, 1] along one axis.
std::vector<double> mapped_breaks(const DensityModel& p, std::size_t axis,
                                  double t, double h)
{
  std::vector<double> out(UnivariateKernel::breakpoints().begin(),
                          UnivariateKernel::breakpoints().end());
  if (axis < p.breakpoints().size())
    for (double b : p.breakpoints()[axis])
      out.push_back((t - b) / h);
  return out;
}

void check_bandwidth(const DensityModel& p, const KernelSpec& k,
                     std::span<const double> h, std::span<const double> t)
{
  if (h.size() != k.dims() || t.size() != k.dims() || p.dims() != k.dims())
    throw std::invalid_argument("oracle: dimension mismatch");
  for (double v : h)
    if (!(v > 0.0))
      throw std::invalid_argument("oracle: bandwidth must be positive");
}

//! int K(u)^power p(t - h u) du over [-1,1]^d
double kernel_convolution(const DensityModel& p, const KernelSpec& k,
                          std::span<const double> h, std::span<const double> t,
                          int power)
{
  check_bandwidth(p, k, h, t);
  const std::size_t d = k.dims();
  std::vector<std::vector<double>> breaks(d);
  for (std::size_t i = 0; i < d; ++i)
    breaks[i] = mapped_breaks(p, i, t[i], h[i]);
  std::vector<double> y(d);
  auto integrand = [&](std::span<const double> u) {
    double kv = k.eval(u);
    if (kv == 0.0)
      return 0.0;
    if (power == 2)
      kv *= kv;
    for (std::size_t i = 0; i < d; ++i)
      y[i] = t[i] - h[i] * u[i];
    return kv * p(std::span<const double>(y));
  };
  const std::vector<double> lo(d, -1.0), hi(d, 1.0);
  return quad::integrate_box(integrand, lo, hi, kOracleTol, breaks);
}

} // namespace

// ---------------------------------------------------------------- Box

Box::Box(std::vector<double> lo, std::vector<double> hi)
  : lower(std::move(lo)), upper(std::move(hi))
{
  if (lower.size() != upper.size() || lower.empty())
    throw std::invalid_argument("box bounds must have equal positive length");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(upper[i] > lower[i]))
      throw std::invalid_argument("box upper bound must exceed lower bound");
}

Box Box::cube(std::size_t d, double lo, double hi)
{
  return Box(std::vector<double>(d, lo), std::vector<double>(d, hi));
}

double Box::volume() const
{
  double v = 1.0;
  for (std::size_t i = 0; i < dims(); ++i)
    v *= upper[i] - lower[i];
  return v;
}

double Box::diameter() const
{
  double s = 0.0;
  for (std::size_t i = 0; i < dims(); ++i)
    s += (upper[i] - lower[i]) * (upper[i] - lower[i]);
  return std::sqrt(s);
}

bool Box::contains(std::span<const double> x) const
{
  if (x.size() != dims())
    return false;
  for (std::size_t i = 0; i < dims(); ++i)
    if (x[i] < lower[i] || x[i] > upper[i])
      return false;
  return true;
}

// ---------------------------------------------------------------- model

DensityModel::DensityModel(DensityDefinition def)
{
  if (!def.eval)
    throw std::invalid_argument("density needs an evaluator");
  if (!(def.sup_bound > 0.0))
    throw std::invalid_argument("density needs a positive sup bound");
  if (!def.sampler)
    def.sampler = rejection_sampler(def.eval, def.support, def.sup_bound);
  def_ = std::make_shared<const DensityDefinition>(std::move(def));
}

double DensityModel::cdf(double x) const
{
  if (!def_->cdf)
    throw std::logic_error("density " + name() + " has no analytic cdf");
  return def_->cdf(x);
}

double DensityModel::boundary_distance(std::span<const double> t) const
{
  if (!def_->boundary_distance)
    throw std::logic_error("density " + name() + " has no boundary distance");
  return def_->boundary_distance(t);
}

void DensityModel::draw(Rng& rng, std::span<double> out) const
{
  if (out.size() != dims())
    throw std::invalid_argument("draw: output has wrong dimension");
  def_->sampler(rng, out);
}

Sample DensityModel::sample(std::size_t n, Rng& rng) const
{
  const std::size_t d = dims();
  std::vector<double> data(n * d);
  for (std::size_t i = 0; i < n; ++i)
    draw(rng, std::span<double>(data.data() + i * d, d));
  return Sample(d, std::move(data));
}

// ---------------------------------------------------------------- families

DensityModel triangular_density()
{
  DensityDefinition def;
  def.name = "triangular";
  def.support = Box::cube(1, -1.0, 1.0);
  def.eval = [](std::span<const double> x) {
    const double a = std::fabs(x[0]);
    return a < 1.0 ? 1.0 - a : 0.0;
  };
  def.sampler = [](Rng& rng, std::span<double> out) {
    const double u = uniform01(rng);
    out[0] = u < 0.5 ? std::sqrt(2.0 * u) - 1.0
                     : 1.0 - std::sqrt(2.0 * (1.0 - u));
  };
  def.cdf = [](double x) {
    if (x <= -1.0)
      return 0.0;
    if (x >= 1.0)
      return 1.0;
    return x <= 0.0 ? 0.5 * (1.0 + x) * (1.0 + x)
                    : 1.0 - 0.5 * (1.0 - x) * (1.0 - x);
  };
  def.holder = {{1.0}, 1.0};
  def.margin = MarginInfo{1.0, 1.0, 2.0};
  def.sup_bound = 1.0;
  def.breakpoints = {{-1.0, 0.0, 1.0}};
  def.boundary_distance = [](std::span<const double> t) {
    return std::max(0.0, 1.0 - std::fabs(t[0]));
  };
  def.support_measure = 2.0;
  def.support_is_box = true;
  return DensityModel(std::move(def));
}

DensityModel uniform_density(double lower, double upper)
{
  if (!(upper > lower))
    throw std::invalid_argument("uniform density needs lower < upper");
  const double height = 1.0 / (upper - lower);
  DensityDefinition def;
  def.name = "uniform";
  def.support = Box({lower}, {upper});
  def.eval = [=](std::span<const double> x) {
    return x[0] >= lower && x[0] <= upper ? height : 0.0;
  };
  def.sampler = [=](Rng& rng, std::span<double> out) {
    out[0] = lower + (upper - lower) * uniform01(rng);
  };
  def.cdf = [=](double x) {
    return std::clamp((x - lower) * height, 0.0, 1.0);
  };
  // constant on its support but not continuous on R: no finite constant
  def.holder = {{1.0}, std::numeric_limits<double>::infinity()};
  def.sup_bound = height;
  def.breakpoints = {{lower, upper}};
  def.boundary_distance = [=](std::span<const double> t) {
    return std::max(0.0, std::min(t[0] - lower, upper - t[0]));
  };
  def.support_measure = upper - lower;
  def.support_is_box = true;
  return DensityModel(std::move(def));
}

DensityModel product_triangular_density(std::size_t d)
{
  if (d == 0)
    throw std::invalid_argument("dimension must be positive");
  DensityDefinition def;
  def.name = "product_triangular";
  def.support = Box::cube(d, -1.0, 1.0);
  def.eval = [](std::span<const double> x) {
    double v = 1.0;
    for (double xi : x) {
      const double a = std::fabs(xi);
      if (a >= 1.0)
        return 0.0;
      v *= 1.0 - a;
    }
    return v;
  };
  def.sampler = [](Rng& rng, std::span<double> out) {
    for (double& o : out) {
      const double u = uniform01(rng);
      o = u < 0.5 ? std::sqrt(2.0 * u) - 1.0 : 1.0 - std::sqrt(2.0 * (1.0 - u));
    }
  };
  if (d == 1)
    def.cdf = [](double x) {
      if (x <= -1.0)
        return 0.0;
      if (x >= 1.0)
        return 1.0;
      return x <= 0.0 ? 0.5 * (1.0 + x) * (1.0 + x)
                      : 1.0 - 0.5 * (1.0 - x) * (1.0 - x);
    };
  // the other factors are bounded by one, so each axis is 1-Lipschitz
  def.holder = {std::vector<double>(d, 1.0), 1.0};
  def.sup_bound = 1.0;
  def.breakpoints.assign(d, {-1.0, 0.0, 1.0});
  def.boundary_distance = [](std::span<const double> t) {
    double m = 1.0;
    for (double ti : t)
      m = std::min(m, 1.0 - std::fabs(ti));
    return std::max(0.0, m);
  };
  def.support_measure = std::pow(2.0, static_cast<double>(d));
  def.support_is_box = true;
  return DensityModel(std::move(def));
}

DensityModel margin_family(double beta, double gamma, std::size_t d)
{
  if (!(beta > 0.0 && beta <= 2.0))
    throw std::invalid_argument("margin_family requires beta in (0, 2]");
  if (!(gamma > 0.0))
    throw std::invalid_argument("margin exponent gamma must be positive");
  if (d == 0)
    throw std::invalid_argument("dimension must be positive");
  if (gamma * beta > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "no compactly supported density with Holder exponent " << beta
        << " satisfies a margin condition with exponent " << gamma
        << ": such densities exist if and only if gamma * beta <= 1";
    throw std::invalid_argument(msg.str());
  }

  const double a = 1.0 / gamma; // boundary exponent
  const bool smooth = beta > 1.0;
  const double dd = static_cast<double>(d);
  // profile (1 - r)^a for beta <= 1, (1 - r^2)^a above (C^1 at the centre)
  const double mass = smooth
                        ? unit_sphere_area(d) * 0.5 * beta_fn(0.5 * dd, a + 1.0)
                        : unit_sphere_area(d) * beta_fn(dd, a + 1.0);
  const double c = 1.0 / mass;
  auto profile = [=](double r) {
    if (r >= 1.0)
      return 0.0;
    return smooth ? c * std::pow(1.0 - r * r, a) : c * std::pow(1.0 - r, a);
  };

  DensityDefinition def;
  {
    std::ostringstream nm;
    nm << "margin(beta=" << beta << ",gamma=" << gamma << ",d=" << d << ")";
    def.name = nm.str();
  }
  def.support = Box::cube(d, -1.0, 1.0);
  def.eval = [=](std::span<const double> x) { return profile(norm2(x)); };

  if (d == 1 && !smooth) {
    // |X| = 1 - V^{1/(a+1)} inverts the CDF of each half exactly
    def.sampler = [=](Rng& rng, std::span<double> out) {
      const double u = uniform01(rng);
      out[0] = u < 0.5 ? std::pow(2.0 * u, 1.0 / (a + 1.0)) - 1.0
                       : 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (a + 1.0));
    };
    def.cdf = [=](double x) {
      if (x <= -1.0)
        return 0.0;
      if (x >= 1.0)
        return 1.0;
      return x <= 0.0 ? 0.5 * std::pow(1.0 + x, a + 1.0)
                      : 1.0 - 0.5 * std::pow(1.0 - x, a + 1.0);
    };
  } else if (d == 1) {
    def.cdf = [=](double x) {
      if (x <= -1.0)
        return 0.0;
      if (x >= 1.0)
        return 1.0;
      auto f = [&](double u) { return profile(std::fabs(u)); };
      const double breaks[] = {0.0};
      return quad::integrate(f, -1.0, x, 1e-12, breaks);
    };
  }

  // Holder modulus of the radial profile; ||.|| is 1-Lipschitz so the
  // profile's modulus carries over to R^d
  std::function<double(double)> f1 = [=](double x) {
    return profile(std::fabs(x));
  };
  std::function<double(double)> df1 = [=](double x) {
    const double r = std::fabs(x);
    if (r >= 1.0)
      return 0.0;
    const double s = x < 0 ? -1.0 : 1.0;
    return smooth ? -2.0 * a * c * x * std::pow(1.0 - r * r, a - 1.0)
                  : -s * a * c * std::pow(1.0 - r, a - 1.0);
  };
  double L = mesh_holder_constant(f1, df1, -1.25, 1.25, beta);
  if (!smooth)
    L = std::max(L, c * std::pow(std::max(1.0, a), beta));
  def.holder = {std::vector<double>(d, beta), L};

  // {0 < p <= eps} is the shell {r >= 1 - s} (or {1 - r^2 <= s}),
  // s = (eps / c)^gamma
  const double vd = unit_ball_volume(d);
  const double k2 = (smooth ? vd * std::max(1.0, 0.5 * dd) : vd * dd) *
                    std::pow(c, -gamma);
  def.margin = MarginInfo{gamma, c, k2};
  def.sup_bound = c;
  def.breakpoints.assign(d, {-1.0, 0.0, 1.0});
  def.boundary_distance = [](std::span<const double> t) {
    return std::max(0.0, 1.0 - norm2(t));
  };
  def.support_measure = vd;
  def.support_is_box = d == 1;
  return DensityModel(std::move(def));
}

double mesh_holder_constant(const std::function<double(double)>& f,
                            const std::function<double(double)>& df,
                            double lo, double hi, double beta, std::size_t m)
{
  if (m < 2)
    throw std::invalid_argument("mesh needs at least two points");
  std::vector<double> x(m), fx(m), dfx(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    fx[i] = f(x[i]);
    if (beta > 1.0)
      dfx[i] = df(x[i]);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j)
        continue;
      const double dist = std::fabs(x[j] - x[i]);
      double num = fx[j] - fx[i];
      if (beta > 1.0)
        num -= dfx[i] * (x[j] - x[i]);
      best = std::max(best, std::fabs(num) / std::pow(dist, beta));
    }
  return best;
}

SuperefficiencyPair superefficiency_pair(long long n, double beta1,
                                         double beta2, double t, double c4)
{
  if (!(beta2 > 0.0 && beta2 < beta1 && beta1 <= 2.0))
    throw std::invalid_argument(
      "superefficiency pair requires 0 < beta2 < beta1 <= 2");
  if (n < 2)
    throw std::invalid_argument("superefficiency pair requires n >= 2");
  if (!(c4 > 0.0))
    throw std::invalid_argument("risk constant c4 must be positive");

  const auto k1 = holder_kernel(beta1).component(0);
  const auto k2 = holder_kernel(beta2).component(0);
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);

  const double Delta = std::pow(nn, -beta2 / (beta2 + 1.0));
  const double delta = 4.0 * c4 *
                       std::pow(Delta / nn, beta1 / (2.0 * beta1 + 1.0)) *
                       std::pow(ln, 1.5);
  const double g1 = std::pow(Delta / k1(0.0), 1.0 / beta1);
  const double g2_base = 1.0 - std::pow(g1, beta1 + 1.0);

  auto fail = [&](const std::string& what) {
    std::ostringstream msg;
    msg << "superefficiency pair invalid for n=" << n << ": " << what;
    throw std::invalid_argument(msg.str());
  };
  if (!(delta < Delta))
    fail("delta_n < Delta_n fails (delta_n=" + std::to_string(delta) +
         ", Delta_n=" + std::to_string(Delta) + ")");
  if (!(g2_base > 0.0))
    fail("g2_n > 0 fails (g1_n >= 1)");
  const double g2 = std::pow(g2_base, 1.0 / (beta1 + 1.0));
  const double h = std::pow((Delta - delta) / k2(0.0), 1.0 / beta2);
  if (!(h < g1))
    fail("h_n < g1_n fails (h_n=" + std::to_string(h) +
         ", g1_n=" + std::to_string(g1) + ")");

  auto scaled = [](const UnivariateKernel& k, double x, double bw, double b) {
    return std::pow(bw, b) * k(x / bw);
  };
  auto p_eval = [=](double x) {
    return scaled(k1, x - t, g1, beta1) +
           scaled(k1, x - t - g1 - g2, g2, beta1);
  };
  auto q_eval = [=](double x) {
    return p_eval(x) - scaled(k2, x - t, h, beta2) +
           scaled(k2, x - t - 2.0 * h, h, beta2);
  };

  for (int i = 0; i <= 10000; ++i) {
    const double x = t - g1 + 2.0 * g1 * i / 10000.0;
    if (q_eval(x) < -1e-15)
      fail("q_n >= 0 fails near x=" + std::to_string(x));
  }

  const Box box({t - g1}, {t + g1 + 2.0 * g2});
  const std::vector<double> breaks{t - g1,         t,          t + g1,
                                   t + g1 + g2,    t + g1 + 2 * g2,
                                   t - h,          t + h,      t + 2 * h,
                                   t + 3 * h};
  const double p_sup = std::max(Delta, std::pow(g2, beta1) * k1(0.0));
  const double q_sup = p_sup + std::pow(h, beta2) * k2(0.0);
  const double lo = t - g1 - 0.1, hi = t + g1 + 2.0 * g2 + 0.1;
  auto numeric_derivative = [](std::function<double(double)> f) {
    return std::function<double(double)>([f](double x) {
      const double e = 1e-7;
      return (f(x + e) - f(x - e)) / (2.0 * e);
    });
  };

  auto make = [&](std::string name, std::function<double(double)> f,
                  double beta, double sup) {
    DensityDefinition def;
    def.name = std::move(name);
    def.support = box;
    def.eval = [f](std::span<const double> x) { return f(x[0]); };
    def.holder = {{beta}, mesh_holder_constant(f, numeric_derivative(f), lo,
                                               hi, beta, 801)};
    def.sup_bound = sup;
    def.breakpoints = {breaks};
    def.support_measure = box.volume();
    def.support_is_box = true;
    return DensityModel(std::move(def));
  };

  return SuperefficiencyPair{make("supereff_p", p_eval, beta1, p_sup),
                             make("supereff_q", q_eval, beta2, q_sup),
                             Delta,
                             q_eval(t),
                             g1,
                             g2,
                             h,
                             t};
}

// ---------------------------------------------------------------- oracles

double oracle_mean(const DensityModel& p, const KernelSpec& k,
                   std::span<const double> h, std::span<const double> t)
{
  return kernel_convolution(p, k, h, t, 1);
}

double oracle_bias(const DensityModel& p, const KernelSpec& k,
                   std::span<const double> h, std::span<const double> t)
{
  return p(t) - oracle_mean(p, k, h, t);
}

double bias_bound(const HolderInfo& holder, const KernelSpec& k,
                  std::span<const double> h)
{
  if (holder.beta.size() != k.dims() || h.size() != k.dims())
    throw std::invalid_argument("bias_bound: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    s += k.abs_moment(i, holder.beta[i]) * std::pow(h[i], holder.beta[i]);
  return holder.L * s;
}

double oracle_variance(const DensityModel& p, const KernelSpec& k,
                       std::span<const double> h, std::span<const double> t,
                       long long n)
{
  if (n < 1)
    throw std::invalid_argument("oracle_variance requires n >= 1");
  double vol = 1.0;
  for (double v : h)
    vol *= v;
  return kernel_convolution(p, k, h, t, 2) / (static_cast<double>(n) * vol);
}

double margin_volume(const DensityModel& p, double eps)
{
  if (!(eps > 0.0))
    throw std::invalid_argument("margin_volume requires eps > 0");
  const Box& box = p.support_box();
  const std::size_t d = box.dims();
  const auto per_axis = static_cast<std::size_t>(std::max(
    1000.0, std::floor(std::pow(4.0e6, 1.0 / static_cast<double>(d)))));

  std::vector<double> step(d);
  double cell = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    step[i] = (box.upper[i] - box.lower[i]) / static_cast<double>(per_axis);
    cell *= step[i];
  }
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  std::size_t hits = 0;
  for (;;) {
    for (std::size_t i = 0; i < d; ++i)
      x[i] = box.lower[i] + (static_cast<double>(idx[i]) + 0.5) * step[i];
    const double v = p(std::span<const double>(x));
    if (v > 0.0 && v <= eps)
      ++hits;
    std::size_t axis = 0;
    while (axis < d && ++idx[axis] == per_axis)
      idx[axis++] = 0;
    if (axis == d)
      break;
  }
  return static_cast<double>(hits) * cell;
}

double oracle_expectation(
  const DensityModel& p,
  const std::function<double(std::span<const double>)>& g)
{
  const Box& box = p.support_box();
  auto integrand = [&](std::span<const double> x) { return g(x) * p(x); };
  return quad::integrate_box(integrand, box.lower, box.upper, kOracleTol,
                             p.breakpoints());
}

} // namespace lodens
