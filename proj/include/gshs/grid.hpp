#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace gshs {

using Index = Eigen::Index;

/// Upper bound on the continuous-state dimension. Small fixed-capacity
/// vectors keep per-sample model callbacks free of heap allocation.
inline constexpr int kMaxAxes = 6;

using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAxes, 1>;
using StateMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxAxes, kMaxAxes>;

/**
 * Rectangular periodic discretization of the continuous state space.
 *
 * Axis k holds N_k points o_k + j L_k / N_k, j = 0..N_k-1. Points are stored
 * row-major (last axis fastest). Frequencies along axis k use natural FFT
 * order: storage slot q maps to n = q for q < N_k/2 and n = q - N_k otherwise,
 * so n ranges over [-N_k/2, N_k/2 - 1].
 */
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(std::vector<int> counts, std::vector<double> lengths, std::vector<double> offsets,
           int mode_count = 1);

  int num_axes() const { return static_cast<int>(counts_.size()); }
  int mode_count() const { return mode_count_; }
  int count(int axis) const { return counts_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double offset(int axis) const { return offsets_[axis]; }
  double spacing(int axis) const { return lengths_[axis] / counts_[axis]; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<double>& lengths() const { return lengths_; }
  const std::vector<double>& offsets() const { return offsets_; }

  /// N_g, the number of points per mode.
  Index num_points() const { return num_points_; }
  /// N_s * N_g, the length of the stacked hybrid vector.
  Index size() const { return num_points_ * mode_count_; }
  double cell_volume() const;
  /// Product of the period lengths.
  double box_volume() const;

  double coordinate(int axis, int j) const {
    return offsets_[axis] + lengths_[axis] * j / counts_[axis];
  }
  State point(Index linear) const;

  /// Stride of axis k in the row-major linear index.
  Index stride(int axis) const { return strides_[axis]; }
  int axis_index(Index linear, int axis) const {
    return static_cast<int>((linear / strides_[axis]) % counts_[axis]);
  }
  std::vector<int> multi_index(Index linear) const;
  Index linear_index(const std::vector<int>& multi) const;

  /// Signed frequency stored at slot q of axis k.
  int frequency(int axis, int slot) const {
    return slot < counts_[axis] / 2 ? slot : slot - counts_[axis];
  }
  /// Storage slot of frequency n after wrapping by N_k-periodicity.
  int wrap_frequency(int axis, long n) const {
    const long N = counts_[axis];
    return static_cast<int>(((n % N) + N) % N);
  }

  /// Nearest grid index along an axis, clamped into [0, N_k - 1].
  int nearest_index(int axis, double x) const;
  /// Whether x lies inside [o_k, o_k + L_k) on every axis.
  bool contains(const State& r) const;

  bool same_geometry(const GridSpec& other) const;
  bool operator==(const GridSpec& other) const {
    return same_geometry(other) && mode_count_ == other.mode_count_;
  }

 private:
  std::vector<int> counts_;
  std::vector<double> lengths_;
  std::vector<double> offsets_;
  std::vector<Index> strides_;
  int mode_count_ = 1;
  Index num_points_ = 0;
};

/**
 * Values of a hybrid-state field on a GridSpec: one block of N_g values per
 * mode, modes outermost. With Scalar = double this is a density on the grid;
 * with complex Scalar it holds Fourier coefficients in natural FFT order.
 */
template <typename Scalar>
class GridField {
 public:
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridField() = default;
  explicit GridField(GridSpec grid) : grid_(std::move(grid)), values_(Values::Zero(grid_.size())) {}
  GridField(GridSpec grid, Values values) : grid_(std::move(grid)), values_(std::move(values)) {
    eigen_assert(values_.size() == grid_.size());
  }

  const GridSpec& grid() const { return grid_; }
  Values& values() { return values_; }
  const Values& values() const { return values_; }

  auto mode(int s) { return values_.segment(s * grid_.num_points(), grid_.num_points()); }
  auto mode(int s) const { return values_.segment(s * grid_.num_points(), grid_.num_points()); }

  Scalar& operator()(int s, Index j) { return values_[s * grid_.num_points() + j]; }
  const Scalar& operator()(int s, Index j) const { return values_[s * grid_.num_points() + j]; }

 private:
  GridSpec grid_;
  Values values_;
};

using DensityGrid = GridField<double>;
using SpectralDensity = GridField<std::complex<double>>;

/// Rectangle-rule integral of a density over the box, summed over modes.
inline double mass(const DensityGrid& d) { return d.values().sum() * d.grid().cell_volume(); }

/// Per-mode probability (rectangle rule).
Eigen::VectorXd mode_masses(const DensityGrid& d);

/// Rectangle-rule L1 distance between two densities of the same grid.
double l1_distance(const DensityGrid& a, const DensityGrid& b);

/// Samples f(r, s) at every grid point and mode.
template <typename Fn>
DensityGrid sample_on_grid(const GridSpec& grid, Fn&& f) {
  DensityGrid d(grid);
  for (int s = 0; s < grid.mode_count(); ++s) {
    for (Index j = 0; j < grid.num_points(); ++j) d(s, j) = f(grid.point(j), s);
  }
  return d;
}

/// Rescales to unit rectangle-rule mass; throws NumericalError on zero mass.
void normalize(DensityGrid& d);

/// Sums the modes into a single-mode density on the same geometry.
DensityGrid continuous_marginal(const DensityGrid& d);

}  // namespace gshs
