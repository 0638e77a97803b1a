#include "gshs/splitting.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gshs/fourier.hpp"

namespace gshs {

SplittingPropagator::SplittingPropagator(const GshsModel& model, GridSpec grid, double dt, SplittingOptions options)
    : grid_(std::move(grid)),
      dt_(dt),
      continuous_(model, grid_, dt, options.continuous),
      jump_(build_jump_generator(model, grid_, options.jump), dt, options.jump) {}

DensityGrid SplittingPropagator::step(const DensityGrid& p, double t) const {
  if (!(p.grid() == grid_)) throw std::invalid_argument("SplittingPropagator: density grid mismatch");
  SpectralDensity f = dft(p);
  continuous_.propagate_inplace(f, t);
  DensityGrid q = idft(f);
  jump_.propagate_inplace(q);
  return q;
}

int step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  const double m = std::round(horizon / dt);
  if (std::abs(m * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw std::invalid_argument("horizon is not a multiple of dt");
  }
  return static_cast<int>(m);
}

PropagationResult propagate(const SplittingPropagator& propagator, const DensityGrid& p0, double horizon,
                            const ThresholdPolicy& policy, const std::vector<double>& output_times) {
  const double dt = propagator.dt();
  const int m = step_count(horizon, dt);
  std::vector<bool> record(static_cast<std::size_t>(m) + 1, output_times.empty());
  for (double t : output_times) {
    const int k = static_cast<int>(std::round(t / dt));
    if (k < 0 || k > m || std::abs(k * dt - t) > 1e-9 * std::max(1.0, t)) {
      throw std::invalid_argument("output time " + std::to_string(t) + " is not a step time within the horizon");
    }
    record[static_cast<std::size_t>(k)] = true;
  }

  PropagationResult result;
  DensityGrid p = p0;
  if (record[0]) result.snapshots.push_back({0.0, p});
  for (int k = 0; k < m; ++k) {
    const auto start = std::chrono::steady_clock::now();
    p = threshold_renormalize(propagator.step(p, k * dt), policy);
    result.step_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    if (record[static_cast<std::size_t>(k) + 1]) result.snapshots.push_back({(k + 1) * dt, p});
  }
  result.final_density = std::move(p);
  return result;
}

}  // namespace gshs
