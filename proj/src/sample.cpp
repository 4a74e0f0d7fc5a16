#include "lodens/sample.hpp"

#include <cmath>
#include <numeric>

namespace lodens {

Sample::Sample(std::size_t dims, std::vector<double> row_major)
  : d_(dims)
{
  if (dims == 0)
    throw std::invalid_argument("sample dimension must be positive");
  if (row_major.size() % dims != 0)
    throw std::invalid_argument("sample data is not a whole number of rows");
  for (double v : row_major)
    if (!std::isfinite(v))
      throw std::invalid_argument("sample contains non-finite values");
  n_ = row_major.size() / dims;

  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return row_major[a * dims] < row_major[b * dims];
  });
  data_.resize(row_major.size());
  axis0_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    std::copy_n(row_major.begin() + static_cast<std::ptrdiff_t>(order[i] * dims),
                dims, data_.begin() + static_cast<std::ptrdiff_t>(i * dims));
    axis0_[i] = data_[i * dims];
  }
}

Sample Sample::from_rows(const std::vector<std::vector<double>>& rows)
{
  if (rows.empty())
    throw std::invalid_argument("cannot infer dimension of an empty sample");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d)
      throw std::invalid_argument("sample rows have inconsistent dimension");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Sample(d, std::move(flat));
}

std::pair<std::size_t, std::size_t> Sample::axis0_range(double lo,
                                                        double hi) const
{
  const auto b = std::lower_bound(axis0_.begin(), axis0_.end(), lo);
  const auto e = std::upper_bound(b, axis0_.end(), hi);
  return {static_cast<std::size_t>(b - axis0_.begin()),
          static_cast<std::size_t>(e - axis0_.begin())};
}

} // namespace lodens
