#include "lodens/support.hpp"
#include "lodens/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lodens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// lower envelope of parabolas; f is strided and may contain infinities,
// out is contiguous
void distance_transform_1d(const double* f, double* out, std::size_t n,
                           std::size_t stride, double spacing_sq,
                           std::vector<std::size_t>& v, std::vector<double>& z,
                           std::vector<double>& buf)
{
  buf.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    buf[i] = f[i * stride];
  v.clear();
  z.clear();
  auto cross = [&](std::size_t q, std::size_t p) {
    const double a = buf[q] / spacing_sq + static_cast<double>(q) * q;
    const double b = buf[p] / spacing_sq + static_cast<double>(p) * p;
    return (a - b) / (2.0 * (static_cast<double>(q) - static_cast<double>(p)));
  };
  for (std::size_t q = 0; q < n; ++q) {
    if (!std::isfinite(buf[q]))
      continue;
    if (v.empty()) {
      v.push_back(q);
      z.push_back(-kInf);
      continue;
    }
    double s = cross(q, v.back());
    while (s <= z.back()) {
      v.pop_back();
      z.pop_back();
      if (v.empty())
        break;
      s = cross(q, v.back());
    }
    if (v.empty()) {
      v.push_back(q);
      z.push_back(-kInf);
    } else {
      v.push_back(q);
      z.push_back(s);
    }
  }
  if (v.empty()) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = kInf;
    return;
  }
  std::size_t k = 0;
  for (std::size_t p = 0; p < n; ++p) {
    while (k + 1 < v.size() && z[k + 1] < static_cast<double>(p))
      ++k;
    const double dq = static_cast<double>(p) - static_cast<double>(v[k]);
    out[p] = spacing_sq * dq * dq + buf[v[k]];
  }
}

} // namespace

GridSet::GridSet(Box box, std::vector<std::size_t> resolution)
  : box_(std::move(box)), resolution_(std::move(resolution))
{
  if (resolution_.size() != box_.dims() || resolution_.empty())
    throw std::invalid_argument("grid resolution must have one entry per axis");
  cells_ = 1;
  cell_volume_ = 1.0;
  for (std::size_t a = 0; a < resolution_.size(); ++a) {
    if (resolution_[a] < 2)
      throw std::invalid_argument("grid resolution must be >= 2 per axis");
    cells_ *= resolution_[a];
    cell_volume_ *= cell_width(a);
  }
  bits_.assign((cells_ + 63) / 64, 0);
}

GridSet::GridSet(Box box, std::size_t resolution_per_axis)
  : GridSet(box, std::vector<std::size_t>(box.dims(), resolution_per_axis))
{}

GridSet GridSet::from_indicator(
  Box box, std::vector<std::size_t> resolution,
  const std::function<bool(std::span<const double>)>& inside)
{
  GridSet g(std::move(box), std::move(resolution));
  for (std::size_t c = 0; c < g.cell_count(); ++c)
    if (inside(g.cell_center(c)))
      g.set(c);
  return g;
}

double GridSet::cell_width(std::size_t axis) const
{
  return (box_.upper.at(axis) - box_.lower.at(axis)) /
         static_cast<double>(resolution_.at(axis));
}

double GridSet::cell_diameter() const
{
  double s = 0.0;
  for (std::size_t a = 0; a < dims(); ++a)
    s += cell_width(a) * cell_width(a);
  return std::sqrt(s);
}

std::vector<std::size_t> GridSet::cell_coords(std::size_t cell) const
{
  std::vector<std::size_t> c(dims());
  for (std::size_t a = 0; a < dims(); ++a) {
    c[a] = cell % resolution_[a];
    cell /= resolution_[a];
  }
  return c;
}

std::vector<double> GridSet::cell_center(std::size_t cell) const
{
  if (cell >= cells_)
    throw std::out_of_range("cell index out of range");
  std::vector<double> x(dims());
  for (std::size_t a = 0; a < dims(); ++a) {
    const std::size_t k = cell % resolution_[a];
    cell /= resolution_[a];
    x[a] = box_.lower[a] + (static_cast<double>(k) + 0.5) * cell_width(a);
  }
  return x;
}

void GridSet::set(std::size_t cell, bool value)
{
  if (cell >= cells_)
    throw std::out_of_range("cell index out of range");
  const std::uint64_t m = std::uint64_t{1} << (cell & 63);
  if (value)
    bits_[cell >> 6] |= m;
  else
    bits_[cell >> 6] &= ~m;
}

std::size_t GridSet::count() const
{
  std::size_t c = 0;
  for (auto w : bits_)
    c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool GridSet::same_grid(const GridSet& o) const
{
  return box_ == o.box_ && resolution_ == o.resolution_;
}

std::string GridSet::to_rle() const
{
  std::ostringstream os;
  bool cur = false;
  std::size_t run = 0;
  bool first = true;
  for (std::size_t c = 0; c < cells_; ++c) {
    if (test(c) == cur) {
      ++run;
      continue;
    }
    os << (first ? "" : " ") << run;
    first = false;
    cur = !cur;
    run = 1;
  }
  os << (first ? "" : " ") << run;
  return os.str();
}

GridSet GridSet::from_rle(Box box, std::vector<std::size_t> resolution,
                          const std::string& rle)
{
  GridSet g(std::move(box), std::move(resolution));
  std::istringstream is(rle);
  std::size_t run = 0;
  std::size_t pos = 0;
  bool cur = false;
  while (is >> run) {
    if (pos + run > g.cells_)
      throw std::invalid_argument("run-length code exceeds grid size");
    if (cur)
      for (std::size_t c = pos; c < pos + run; ++c)
        g.set(c);
    pos += run;
    cur = !cur;
  }
  if (!is.eof() || pos != g.cells_)
    throw std::invalid_argument("run-length code does not cover the grid");
  return g;
}

double offset_level(double n, double beta, int d, double c6)
{
  if (!(n >= 2.0))
    throw std::invalid_argument("offset level needs n >= 2");
  if (!(beta > 0.0 && beta <= 2.0))
    throw std::invalid_argument("offset level needs beta in (0, 2]");
  if (d < 1)
    throw std::invalid_argument("offset level needs d >= 1");
  if (c6 < 0.0)
    throw std::invalid_argument("offset constant must be nonnegative");
  const double ln = std::log(n);
  return c6 * std::pow(std::pow(ln, 1.5) / n, beta / (beta + d)) *
         std::sqrt(ln);
}

GridSet plugin_support(
  const std::function<double(std::span<const double>)>& estimate,
  const Box& box, std::vector<std::size_t> resolution, double alpha,
  unsigned threads)
{
  GridSet g(box, std::move(resolution));
  std::vector<char> in(g.cell_count(), 0);
  parallel_for(g.cell_count(), threads, [&](std::size_t c) {
    const double v = estimate(g.cell_center(c));
    in[c] = v > alpha || (alpha > 0.0 && v == alpha);
  });
  for (std::size_t c = 0; c < g.cell_count(); ++c)
    if (in[c])
      g.set(c);
  return g;
}

GridSet plugin_support(const Sample& sample, const KernelSpec& spec,
                       const EstimatorConfig& config, const Box& box,
                       std::vector<std::size_t> resolution, double alpha,
                       unsigned threads)
{
  if (box.dims() != sample.dims())
    throw std::invalid_argument("support box and sample dimensions differ");
  const AdaptiveEstimator est(sample, spec, config);
  return plugin_support(
    [&](std::span<const double> x) { return est(x); }, box,
    std::move(resolution), alpha, threads);
}

double symmetric_difference(const GridSet& a, const GridSet& b)
{
  if (!a.same_grid(b))
    throw std::invalid_argument("symmetric difference needs a common grid");
  std::size_t c = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w)
    c += static_cast<std::size_t>(std::popcount(a.words()[w] ^ b.words()[w]));
  return static_cast<double>(c) * a.cell_volume();
}

double symmetric_difference(const GridSet& a, const Box& b)
{
  if (b.dims() != a.dims())
    throw std::invalid_argument("symmetric difference: dimension mismatch");
  const std::size_t d = a.dims();
  // lambda(A) + lambda(B) - 2 lambda(A n B), with A a union of cells
  double inter = 0.0;
  std::vector<double> lo(d), hi(d);
  for (std::size_t c = 0; c < a.cell_count(); ++c) {
    if (!a.test(c))
      continue;
    const auto k = a.cell_coords(c);
    double v = 1.0;
    for (std::size_t i = 0; i < d && v > 0.0; ++i) {
      const double w = a.cell_width(i);
      const double cl = a.box().lower[i] + static_cast<double>(k[i]) * w;
      const double cu = cl + w;
      v *= std::max(0.0, std::min(cu, b.upper[i]) - std::max(cl, b.lower[i]));
    }
    inter += v;
  }
  return a.measure() + b.volume() - 2.0 * inter;
}

double support_error(const GridSet& a, const DensityModel& p)
{
  if (p.support_is_box())
    return symmetric_difference(a, p.support_box());
  const auto truth = GridSet::from_indicator(
    a.box(), a.resolution(),
    [&](std::span<const double> x) { return p(x) > 0.0; });
  return symmetric_difference(a, truth);
}

std::vector<double> center_distance_sq(const GridSet& marked, bool complement,
                                       bool outside_marked)
{
  const std::size_t d = marked.dims();
  const auto& res = marked.resolution();
  // lattice of cell corners, edge midpoints and centers at half-cell
  // spacing; the nearest point of a union of closed cells to any lattice
  // point is itself a lattice point
  std::vector<std::size_t> fine(d);
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    fine[a] = 2 * res[a] + 1;
    total *= fine[a];
  }
  auto in_set = [&](const std::vector<long long>& cell) {
    std::size_t lin = 0;
    std::size_t mul = 1;
    for (std::size_t a = 0; a < d; ++a) {
      if (cell[a] < 0 || cell[a] >= static_cast<long long>(res[a]))
        return outside_marked;
      lin += static_cast<std::size_t>(cell[a]) * mul;
      mul *= res[a];
    }
    return marked.test(lin) != complement;
  };

  std::vector<double> grid(total, kInf);
  std::vector<std::size_t> p(d, 0);
  std::vector<long long> cell(d);
  for (std::size_t lin = 0; lin < total; ++lin) {
    // enumerate the (up to 2^d) cells adjacent to lattice point p
    std::size_t even_axes = 0;
    for (std::size_t a = 0; a < d; ++a)
      if (p[a] % 2 == 0)
        ++even_axes;
    bool hit = false;
    for (std::size_t combo = 0; combo < (std::size_t{1} << even_axes) && !hit;
         ++combo) {
      std::size_t bit = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const long long q = static_cast<long long>(p[a]);
        if (q % 2 == 1) {
          cell[a] = (q - 1) / 2;
        } else {
          cell[a] = ((combo >> bit) & 1u) ? q / 2 : q / 2 - 1;
          ++bit;
        }
      }
      hit = in_set(cell);
    }
    if (hit)
      grid[lin] = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      if (++p[a] < fine[a])
        break;
      p[a] = 0;
    }
  }

  std::vector<std::size_t> v;
  std::vector<double> z, buf, line;
  std::size_t stride = 1;
  for (std::size_t a = 0; a < d; ++a) {
    const double half = 0.5 * marked.cell_width(a);
    const std::size_t n = fine[a];
    line.resize(n);
    for (std::size_t base = 0; base < total; ++base) {
      // visit each line along axis a once, from its first point
      if ((base / stride) % n != 0)
        continue;
      distance_transform_1d(grid.data() + base, line.data(), n, stride,
                            half * half, v, z, buf);
      for (std::size_t i = 0; i < n; ++i)
        grid[base + i * stride] = line[i];
    }
    stride *= n;
  }

  // cell centers sit at odd lattice coordinates
  std::vector<double> out(marked.cell_count());
  for (std::size_t c = 0; c < marked.cell_count(); ++c) {
    const auto k = marked.cell_coords(c);
    std::size_t lin = 0;
    std::size_t mul = 1;
    for (std::size_t a = 0; a < d; ++a) {
      lin += (2 * k[a] + 1) * mul;
      mul *= fine[a];
    }
    out[c] = grid[lin];
  }
  return out;
}

GridSet parallel_set(const GridSet& a, double eps, ParallelSide side)
{
  if (!(eps >= a.cell_diameter()))
    throw std::invalid_argument(
      "parallel set radius is below the grid resolution");
  GridSet out(a.box(), a.resolution());
  const double e2 = eps * eps;
  if (side == ParallelSide::outer) {
    const auto dist = center_distance_sq(a, false, false);
    for (std::size_t c = 0; c < a.cell_count(); ++c)
      if (dist[c] <= e2)
        out.set(c);
  } else {
    const auto dist = center_distance_sq(a, true, true);
    for (std::size_t c = 0; c < a.cell_count(); ++c)
      if (a.test(c) && dist[c] >= e2)
        out.set(c);
  }
  return out;
}

GridSet refine_grid(const GridSet& a, std::size_t factor)
{
  if (factor == 0)
    throw std::invalid_argument("refinement factor must be positive");
  if (factor == 1)
    return a;
  std::vector<std::size_t> res = a.resolution();
  for (auto& r : res)
    r *= factor;
  GridSet out(a.box(), res);
  for (std::size_t c = 0; c < out.cell_count(); ++c) {
    const auto k = out.cell_coords(c);
    std::size_t lin = 0;
    std::size_t mul = 1;
    for (std::size_t i = 0; i < k.size(); ++i) {
      lin += (k[i] / factor) * mul;
      mul *= a.resolution()[i];
    }
    if (a.test(lin))
      out.set(c);
  }
  return out;
}

double parallel_set_volume(const GridSet& a, double eps, ParallelSide side,
                           std::size_t refine)
{
  if (!(eps >= a.cell_diameter()))
    throw std::invalid_argument(
      "parallel set radius is below the grid resolution");
  return parallel_set(refine_grid(a, refine), eps, side).measure();
}

ComplexityReport complexity_diagnostic(const GridSet& a, double mu,
                                       std::span<const double> eps_list,
                                       std::size_t refine)
{
  if (!(mu > 0.0))
    throw std::invalid_argument("complexity exponent must be positive");
  ComplexityReport rep;
  rep.mu = mu;
  const double base = a.measure();
  std::vector<double> lx, ly;
  for (double e : eps_list) {
    const double shell = parallel_set_volume(a, e, ParallelSide::outer, refine) - base;
    const double r = shell / std::pow(e, mu);
    rep.eps.push_back(e);
    rep.ratio.push_back(r);
    rep.sup_ratio = std::max(rep.sup_ratio, r);
    if (r > 0.0) {
      lx.push_back(std::log(e));
      ly.push_back(std::log(r));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.log_slope = sxx > 0.0 ? sxy / sxx : 0.0;
    rep.diverging = rep.log_slope < -0.25;
  }
  return rep;
}

} // namespace lodens
