#pragma once

#include <string>
#include <variant>

#include "gshs/grid.hpp"

namespace gshs {

/// Leave the density untouched.
struct NoThreshold {};
/// Zero every value below a fixed density level.
struct AbsoluteThreshold {
  double level = 3e-3;
};
/// Zero every value below a fraction of the global peak (all modes).
struct PeakFractionThreshold {
  double fraction = 1.0 / 40.0;
};

using ThresholdPolicy = std::variant<NoThreshold, AbsoluteThreshold, PeakFractionThreshold>;

/// Cut-off density level the policy implies for d (0 for NoThreshold).
double threshold_level(const DensityGrid& d, const ThresholdPolicy& policy);

/**
 * Sets every value below the policy's level, and every negative value, to
 * exactly zero, then rescales to unit mass. NoThreshold returns d unchanged.
 * Throws NumericalError when nothing positive survives.
 */
DensityGrid threshold_renormalize(const DensityGrid& d, const ThresholdPolicy& policy);

std::string describe(const ThresholdPolicy& policy);

}  // namespace gshs
