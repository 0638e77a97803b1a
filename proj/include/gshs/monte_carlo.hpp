#pragma once

#include <cstdint>
#include <vector>

#include "gshs/grid.hpp"
#include "gshs/model.hpp"
#include "gshs/rng.hpp"

namespace gshs {

/// Right-continuous sample path: states[i] is the state at times[i], taken
/// after any jump at that time.
struct Execution {
  std::vector<double> times;
  std::vector<HybridState> states;
  std::vector<double> jump_times;
};

/**
 * One step of the execution: Euler-Maruyama motion over dt (split into
 * motion_substeps equal sub-intervals), then a jump with probability
 * 1 - exp(-lambda dt) evaluated at the moved state. Angular axes are wrapped
 * into [0, 2 pi). Returns whether a jump occurred; throws NumericalError on a
 * non-finite state.
 */
bool advance(const GshsModel& model, HybridState& x, double t, double dt, RandomSource& rng,
             int motion_substeps = 1);

Execution sample_path(const GshsModel& model, const HybridState& x0, double t_end, double dt, RandomSource& rng,
                      int motion_substeps = 1);
/// Draws x0 from the model's initial distribution with stream seed.
Execution sample_path(const GshsModel& model, double t_end, double dt, std::uint64_t seed, int motion_substeps = 1);

/// Independent paths with per-path streams seed + index, advanced in lockstep.
class MonteCarloEnsemble {
 public:
  MonteCarloEnsemble(const GshsModel& model, const Distribution& initial, Index count, std::uint64_t seed);

  void step(double dt, int motion_substeps = 1);
  double time() const { return time_; }
  const std::vector<HybridState>& states() const { return states_; }
  Index size() const { return static_cast<Index>(states_.size()); }

 private:
  const GshsModel* model_;
  std::vector<HybridState> states_;
  std::vector<RandomSource> streams_;
  double time_ = 0.0;
};

struct Histogram {
  DensityGrid density;
  /// Weight fraction of samples outside the grid box.
  double drop_fraction = 0.0;
};

/**
 * Counts samples into the cells centred on the grid points and divides by
 * total weight times cell volume. Samples outside the box are dropped; angular
 * axes are wrapped first. weights, when given, need not be normalized.
 */
Histogram histogram_density(const std::vector<HybridState>& samples, const GridSpec& grid,
                            const std::vector<bool>& angular_axes = {}, const std::vector<double>& weights = {});

}  // namespace gshs
