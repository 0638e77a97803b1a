#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gshs/dump.hpp"
#include "gshs/model.hpp"
#include "gshs/splitting.hpp"
#include "gshs/threshold.hpp"

namespace gshs {

/// Posterior thresholding used during estimation.
inline const ThresholdPolicy kEstimationThreshold = PeakFractionThreshold{1.0 / 40.0};

/**
 * Bayes correction: posterior proportional to likelihood(z, r_j, s) * prior,
 * renormalized, then thresholded with the given policy. Throws NumericalError
 * if the unnormalized posterior vanishes.
 */
DensityGrid correct(const DensityGrid& prior, const Measurement& z, const GshsModel& model,
                    const ThresholdPolicy& policy = kEstimationThreshold);

struct EstimateReport {
  /// Mean per axis; the mean direction in [0, 2 pi) on angular axes.
  Eigen::VectorXd mean;
  HybridState map_state;
  Eigen::VectorXd mode_marginal;
  /// Standard deviation per axis; circular standard deviation on angular axes.
  Eigen::VectorXd stddev;
  /// Mean direction per axis, NaN on non-angular axes.
  Eigen::VectorXd mean_direction;
  /// False when some angular axis has a vanishing mean resultant length.
  bool direction_defined = true;
  /// Mode with the largest marginal probability (lowest index on ties).
  int mode_estimate() const;
};

/// Mean resultant lengths below this leave the mean direction undefined.
inline constexpr double kMinResultantLength = 1e-12;

/**
 * Point estimates of a normalized density. With strict set, an undefined mean
 * direction throws NumericalError; otherwise it is reported as direction 0
 * with infinite circular deviation and direction_defined = false.
 */
EstimateReport point_estimates(const DensityGrid& p, const std::vector<bool>& angular_axes, bool strict = true);

struct TimedMeasurement {
  double time = 0.0;
  Measurement z;
};

struct FilterOptions {
  /// Thresholding after steps that receive no measurement.
  ThresholdPolicy propagation = AbsoluteThreshold{};
  /// Thresholding after every correction.
  ThresholdPolicy correction = kEstimationThreshold;
  /// Times at which posterior snapshots are kept.
  std::vector<double> snapshot_times;
};

struct FilterStep {
  double time = 0.0;
  bool corrected = false;
  std::optional<Measurement> z;
  EstimateReport estimate;
};

struct FilterResult {
  std::vector<FilterStep> steps;
  std::vector<TimedDensity> snapshots;
  /// Wall-clock seconds per step (propagation plus correction).
  std::vector<double> step_seconds;
  DensityGrid final_density;
};

/**
 * Grid Bayesian filter over [0, horizon]: step k propagates one splitting step
 * and then corrects with the measurement stamped t_k if there is one; a
 * measurement at t = 0 corrects p0. Measurement times must be multiples of dt.
 */
FilterResult run_filter(const SplittingPropagator& propagator, const GshsModel& model, const DensityGrid& p0,
                        const std::vector<TimedMeasurement>& measurements, double horizon,
                        const FilterOptions& options = {});

}  // namespace gshs
