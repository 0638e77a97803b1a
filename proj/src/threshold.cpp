#include "gshs/threshold.hpp"

#include <sstream>

#include "gshs/errors.hpp"

namespace gshs {

double threshold_level(const DensityGrid& d, const ThresholdPolicy& policy) {
  if (const auto* a = std::get_if<AbsoluteThreshold>(&policy)) return a->level;
  if (const auto* p = std::get_if<PeakFractionThreshold>(&policy)) {
    return p->fraction * d.values().maxCoeff();
  }
  return 0.0;
}

DensityGrid threshold_renormalize(const DensityGrid& d, const ThresholdPolicy& policy) {
  if (std::holds_alternative<NoThreshold>(policy)) return d;
  const double level = threshold_level(d, policy);
  DensityGrid out = d;
  auto& v = out.values();
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= level) || v[i] < 0.0) v[i] = 0.0;
  }
  const double m = mass(out);
  if (!(m > 0.0)) {
    throw NumericalError("threshold_renormalize: all mass below threshold " + std::to_string(level) +
                         " (solver divergence?)");
  }
  v /= m;
  return out;
}

std::string describe(const ThresholdPolicy& policy) {
  std::ostringstream os;
  if (const auto* a = std::get_if<AbsoluteThreshold>(&policy)) {
    os << "absolute " << a->level;
  } else if (const auto* p = std::get_if<PeakFractionThreshold>(&policy)) {
    os << "peak_fraction " << p->fraction;
  } else {
    os << "none";
  }
  return os.str();
}

}  // namespace gshs
