#pragma once

#include "lodens/densities.hpp"
#include "lodens/estimator.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lodens {

//! Subset of a box discretized into equal cells, one bit per cell.
//! Cells are numbered with axis 0 varying fastest.
class GridSet
{
public:
  GridSet() = default;
  GridSet(Box box, std::vector<std::size_t> resolution);
  GridSet(Box box, std::size_t resolution_per_axis);

  //! Cells whose center satisfies `inside`.
  static GridSet from_indicator(
    Box box, std::vector<std::size_t> resolution,
    const std::function<bool(std::span<const double>)>& inside);

  const Box& box() const noexcept { return box_; }
  const std::vector<std::size_t>& resolution() const noexcept
  {
    return resolution_;
  }
  std::size_t dims() const noexcept { return resolution_.size(); }
  std::size_t cell_count() const noexcept { return cells_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double cell_width(std::size_t axis) const;
  double cell_diameter() const;
  std::vector<double> cell_center(std::size_t cell) const;
  std::vector<std::size_t> cell_coords(std::size_t cell) const;

  bool test(std::size_t cell) const
  {
    return (bits_[cell >> 6] >> (cell & 63)) & 1u;
  }
  void set(std::size_t cell, bool value = true);

  std::size_t count() const;
  double measure() const { return static_cast<double>(count()) * cell_volume_; }
  bool same_grid(const GridSet& o) const;
  const std::vector<std::uint64_t>& words() const noexcept { return bits_; }

  //! Run lengths of alternating bits starting with a run of zeros,
  //! space-separated.
  std::string to_rle() const;
  static GridSet from_rle(Box box, std::vector<std::size_t> resolution,
                          const std::string& rle);

  bool operator==(const GridSet&) const = default;

private:
  Box box_;
  std::vector<std::size_t> resolution_;
  std::size_t cells_ = 0;
  double cell_volume_ = 0.0;
  std::vector<std::uint64_t> bits_;
};

//! c6 ((ln n)^{3/2} / n)^{beta/(beta+d)} sqrt(ln n)
double offset_level(double n, double beta, int d, double c6);

//! Cells whose center estimate exceeds alpha; cells at exactly alpha are
//! added when alpha > 0 as the grid stand-in for the closure.
GridSet plugin_support(
  const std::function<double(std::span<const double>)>& estimate,
  const Box& box, std::vector<std::size_t> resolution, double alpha,
  unsigned threads = 1);

//! Plug-in rule with the adaptive estimator.
GridSet plugin_support(const Sample& sample, const KernelSpec& spec,
                       const EstimatorConfig& config, const Box& box,
                       std::vector<std::size_t> resolution, double alpha,
                       unsigned threads = 1);

//! lambda(A xor B) on the common grid
double symmetric_difference(const GridSet& a, const GridSet& b);
//! lambda(A xor B) for a box B, exact for the union of cells A
double symmetric_difference(const GridSet& a, const Box& b);
//! Against the support of p: exact when the support is a box, else on the
//! grid of `a` using {p > 0} at cell centers.
double support_error(const GridSet& a, const DensityModel& p);

enum class ParallelSide
{
  outer,
  inner
};

//! Squared Euclidean distance from every cell center to the union of the
//! closed cells selected by `marked` (and to the outside of the box when
//! `outside_marked`). Infinity when nothing is marked.
std::vector<double> center_distance_sq(const GridSet& marked,
                                       bool complement, bool outside_marked);

//! Cells within distance eps of A (outer) or whose eps-ball stays inside A
//! (inner, the outside of the box counting as complement).
GridSet parallel_set(const GridSet& a, double eps, ParallelSide side);
//! Every cell split into refine^d subcells.
GridSet refine_grid(const GridSet& a, std::size_t factor);
//! Measure of the parallel set; refine > 1 evaluates the distance at
//! subcell centers, which averages out the lattice error along curved
//! boundaries.
double parallel_set_volume(const GridSet& a, double eps, ParallelSide side,
                           std::size_t refine = 1);

struct ComplexityReport
{
  double mu = 0.0;
  std::vector<double> eps;
  std::vector<double> ratio;   // lambda(A^eps \ A) / eps^mu
  double sup_ratio = 0.0;
  double log_slope = 0.0;      // d ln ratio / d ln eps
  bool diverging = false;      // ratio grows as eps -> 0
};

//! Trivial decomposition A = A u {}; ratios over eps_list.
ComplexityReport complexity_diagnostic(const GridSet& a, double mu,
                                       std::span<const double> eps_list,
                                       std::size_t refine = 1);

} // namespace lodens
