#include "gshs/fourier.hpp"

namespace gshs {

Eigen::VectorXd frequencies_along(const GridSpec& grid, int axis) {
  Eigen::VectorXd n(grid.num_points());
  for (Index j = 0; j < grid.num_points(); ++j) n[j] = grid.frequency(axis, grid.axis_index(j, axis));
  return n;
}

}  // namespace gshs
