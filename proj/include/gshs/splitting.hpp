#pragma once

#include <vector>

#include "gshs/continuous.hpp"
#include "gshs/dump.hpp"
#include "gshs/jump.hpp"
#include "gshs/model.hpp"
#include "gshs/threshold.hpp"

namespace gshs {

struct SplittingOptions {
  ContinuousOptions continuous;
  JumpOptions jump;
};

/**
 * One Lie splitting step for a fixed dt: dft, continuous stage per mode, idft,
 * then the jump stage on the grid values. Generators and their exponentials
 * are built once at construction.
 */
class SplittingPropagator {
 public:
  SplittingPropagator(const GshsModel& model, GridSpec grid, double dt, SplittingOptions options = {});

  /// Advances p from t to t + dt (no thresholding).
  DensityGrid step(const DensityGrid& p, double t) const;

  const GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }
  const ContinuousPropagator& continuous() const { return continuous_; }
  const JumpPropagator& jump() const { return jump_; }

 private:
  GridSpec grid_;
  double dt_;
  ContinuousPropagator continuous_;
  JumpPropagator jump_;
};

inline DensityGrid split_step(const SplittingPropagator& propagator, const DensityGrid& p, double t) {
  return propagator.step(p, t);
}

struct PropagationResult {
  /// Snapshots at the requested output times (all step times if none requested).
  std::vector<TimedDensity> snapshots;
  /// Wall-clock seconds of every step, thresholding included.
  std::vector<double> step_seconds;
  DensityGrid final_density;
};

/// Number of steps m with m * dt = horizon; throws std::invalid_argument otherwise.
int step_count(double horizon, double dt);

/**
 * Runs m = horizon / dt splitting steps from t = 0, thresholding after each
 * step. Output times must be multiples of dt within [0, horizon].
 */
PropagationResult propagate(const SplittingPropagator& propagator, const DensityGrid& p0, double horizon,
                            const ThresholdPolicy& policy, const std::vector<double>& output_times = {});

}  // namespace gshs
