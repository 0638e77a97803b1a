#include "gshs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gshs/errors.hpp"

namespace gshs {

GridSpec::GridSpec(std::vector<int> counts, std::vector<double> lengths,
                   std::vector<double> offsets, int mode_count)
    : counts_(std::move(counts)),
      lengths_(std::move(lengths)),
      offsets_(std::move(offsets)),
      mode_count_(mode_count) {
  if (counts_.empty() || counts_.size() > static_cast<std::size_t>(kMaxAxes)) {
    throw std::invalid_argument("grid needs between 1 and " + std::to_string(kMaxAxes) + " axes");
  }
  if (lengths_.size() != counts_.size() || offsets_.size() != counts_.size()) {
    throw std::invalid_argument("grid counts, lengths and offsets must have equal length");
  }
  if (mode_count_ < 1) throw std::invalid_argument("grid needs at least one mode");
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (counts_[k] < 2 || counts_[k] % 2 != 0) {
      throw std::invalid_argument("grid point count must be even and >= 2 on axis " +
                                  std::to_string(k));
    }
    if (!(lengths_[k] > 0.0) || !std::isfinite(lengths_[k])) {
      throw std::invalid_argument("grid length must be positive on axis " + std::to_string(k));
    }
    if (!std::isfinite(offsets_[k])) {
      throw std::invalid_argument("grid offset must be finite on axis " + std::to_string(k));
    }
  }
  strides_.assign(counts_.size(), 1);
  for (int k = num_axes() - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * counts_[k + 1];
  num_points_ = strides_[0] * counts_[0];
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < num_axes(); ++k) v *= spacing(k);
  return v;
}

double GridSpec::box_volume() const {
  double v = 1.0;
  for (double L : lengths_) v *= L;
  return v;
}

State GridSpec::point(Index linear) const {
  State r(num_axes());
  for (int k = 0; k < num_axes(); ++k) r[k] = coordinate(k, axis_index(linear, k));
  return r;
}

std::vector<int> GridSpec::multi_index(Index linear) const {
  std::vector<int> m(counts_.size());
  for (int k = 0; k < num_axes(); ++k) m[k] = axis_index(linear, k);
  return m;
}

Index GridSpec::linear_index(const std::vector<int>& multi) const {
  Index linear = 0;
  for (int k = 0; k < num_axes(); ++k) linear += strides_[k] * multi[k];
  return linear;
}

int GridSpec::nearest_index(int axis, double x) const {
  const double j = std::round((x - offsets_[axis]) / spacing(axis));
  return static_cast<int>(std::clamp(j, 0.0, static_cast<double>(counts_[axis] - 1)));
}

bool GridSpec::contains(const State& r) const {
  for (int k = 0; k < num_axes(); ++k) {
    if (!(r[k] >= offsets_[k] && r[k] < offsets_[k] + lengths_[k])) return false;
  }
  return true;
}

bool GridSpec::same_geometry(const GridSpec& other) const {
  return counts_ == other.counts_ && lengths_ == other.lengths_ && offsets_ == other.offsets_;
}

Eigen::VectorXd mode_masses(const DensityGrid& d) {
  Eigen::VectorXd m(d.grid().mode_count());
  for (int s = 0; s < d.grid().mode_count(); ++s) m[s] = d.mode(s).sum() * d.grid().cell_volume();
  return m;
}

double l1_distance(const DensityGrid& a, const DensityGrid& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("l1_distance: grids differ");
  return (a.values() - b.values()).cwiseAbs().sum() * a.grid().cell_volume();
}

void normalize(DensityGrid& d) {
  const double m = mass(d);
  if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("cannot normalize density with mass " + std::to_string(m));
  d.values() /= m;
}

DensityGrid continuous_marginal(const DensityGrid& d) {
  const GridSpec& g = d.grid();
  DensityGrid out(GridSpec(g.counts(), g.lengths(), g.offsets(), 1));
  for (int s = 0; s < g.mode_count(); ++s) out.values() += d.mode(s);
  return out;
}

}  // namespace gshs
