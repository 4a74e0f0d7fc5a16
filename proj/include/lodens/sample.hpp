#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lodens {

//! n observations in R^d, stored row-major and ordered by the first
//! coordinate so that bandwidth windows are contiguous ranges.
class Sample
{
public:
  Sample() = default;
  Sample(std::size_t dims, std::vector<double> row_major);
  static Sample from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  std::size_t dims() const noexcept { return d_; }
  bool empty() const noexcept { return n_ == 0; }

  std::span<const double> row(std::size_t i) const
  {
    return {data_.data() + i * d_, d_};
  }
  std::span<const double> data() const noexcept { return data_; }

  //! Visits every observation X with |t_k - X_k| <= h_k for all k, passing
  //! the standardized offsets u_k = (t_k - X_k) / h_k.
  template <class F>
  void for_each_in_window(std::span<const double> t, std::span<const double> h,
                          F&& visit) const
  {
    if (t.size() != d_ || h.size() != d_)
      throw std::invalid_argument("window query: dimension mismatch");
    const auto [first, last] = axis0_range(t[0] - h[0], t[0] + h[0]);
    if (d_ == 1) {
      const double inv = 1.0 / h[0];
      for (std::size_t i = first; i < last; ++i) {
        const double u = (t[0] - data_[i]) * inv;
        visit(std::span<const double>(&u, 1));
      }
      return;
    }
    std::vector<double> u(d_);
    for (std::size_t i = first; i < last; ++i) {
      const double* x = data_.data() + i * d_;
      bool inside = true;
      for (std::size_t k = 0; k < d_; ++k) {
        u[k] = (t[k] - x[k]) / h[k];
        if (u[k] > 1.0 || u[k] < -1.0) {
          inside = false;
          break;
        }
      }
      if (inside)
        visit(std::span<const double>(u));
    }
  }

  //! Index range of observations whose first coordinate lies in [lo, hi].
  std::pair<std::size_t, std::size_t> axis0_range(double lo, double hi) const;

private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> data_;
  std::vector<double> axis0_;
};

} // namespace lodens
