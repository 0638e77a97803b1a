#include "gshs/bayes.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gshs/errors.hpp"
#include "gshs/models.hpp"

namespace gshs {

DensityGrid correct(const DensityGrid& prior, const Measurement& z, const GshsModel& model,
                    const ThresholdPolicy& policy) {
  if (z.size() != model.measurement_dim) {
    throw std::invalid_argument("correct: measurement has dimension " + std::to_string(z.size()) + ", model expects " +
                                std::to_string(model.measurement_dim));
  }
  const GridSpec& grid = prior.grid();
  DensityGrid post(grid);
  for (int s = 0; s < grid.mode_count(); ++s) {
    for (Index j = 0; j < grid.num_points(); ++j) {
      const double w = prior(s, j);
      if (w == 0.0) continue;
      const double l = model.likelihood(z, grid.point(j), s);
      if (!(l >= 0.0) || !std::isfinite(l)) throw NumericalError("correct: likelihood must be finite and nonnegative");
      post(s, j) = l * w;
    }
  }
  if (!(post.values().maxCoeff() > 0.0)) {
    throw NumericalError("correct: posterior vanishes everywhere (measurement incompatible with the prior support)");
  }
  normalize(post);
  return threshold_renormalize(post, policy);
}

int EstimateReport::mode_estimate() const {
  int best = 0;
  for (int s = 1; s < mode_marginal.size(); ++s) {
    if (mode_marginal[s] > mode_marginal[best]) best = s;
  }
  return best;
}

EstimateReport point_estimates(const DensityGrid& p, const std::vector<bool>& angular_axes, bool strict) {
  const GridSpec& grid = p.grid();
  const int dims = grid.num_axes();
  if (!angular_axes.empty() && static_cast<int>(angular_axes.size()) != dims) {
    throw std::invalid_argument("point_estimates: angular flag count does not match the grid");
  }
  auto angular = [&](int k) { return !angular_axes.empty() && angular_axes[static_cast<std::size_t>(k)]; };

  EstimateReport report;
  report.mode_marginal = mode_masses(p);
  const double total = report.mode_marginal.sum();
  if (!(total > 0.0)) throw NumericalError("point_estimates: density has no mass");
  report.mode_marginal /= total;

  Eigen::VectorXd first = Eigen::VectorXd::Zero(dims), second = Eigen::VectorXd::Zero(dims);
  Eigen::VectorXd cosine = Eigen::VectorXd::Zero(dims), sine = Eigen::VectorXd::Zero(dims);
  Index best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  const auto& values = p.values();
  for (Index i = 0; i < values.size(); ++i) {
    if (values[i] > best_value) {
      best_value = values[i];
      best = i;
    }
  }
  // Marginal over modes first, then moments per point.
  for (Index j = 0; j < grid.num_points(); ++j) {
    double w = 0.0;
    for (int s = 0; s < grid.mode_count(); ++s) w += p(s, j);
    if (w == 0.0) continue;
    for (int k = 0; k < dims; ++k) {
      const double x = grid.coordinate(k, grid.axis_index(j, k));
      first[k] += w * x;
      second[k] += w * x * x;
      if (angular(k)) {
        cosine[k] += w * std::cos(x);
        sine[k] += w * std::sin(x);
      }
    }
  }
  const double weight = values.sum();
  report.mean.resize(dims);
  report.stddev.resize(dims);
  report.mean_direction = Eigen::VectorXd::Constant(dims, std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < dims; ++k) {
    if (angular(k)) {
      const double resultant = std::hypot(cosine[k], sine[k]) / weight;
      if (resultant < kMinResultantLength) {
        if (strict) throw NumericalError("point_estimates: mean direction undefined (resultant length ~ 0)");
        report.direction_defined = false;
        report.mean_direction[k] = 0.0;
        report.stddev[k] = std::numeric_limits<double>::infinity();
      } else {
        report.mean_direction[k] = wrap_angle(std::atan2(sine[k], cosine[k]));
        report.stddev[k] = std::sqrt(std::max(0.0, -2.0 * std::log(std::min(1.0, resultant))));
      }
      report.mean[k] = report.mean_direction[k];
    } else {
      const double mean = first[k] / weight;
      report.mean[k] = mean;
      report.stddev[k] = std::sqrt(std::max(0.0, second[k] / weight - mean * mean));
    }
  }
  report.map_state.s = static_cast<int>(best / grid.num_points());
  report.map_state.r = grid.point(best % grid.num_points());
  return report;
}

FilterResult run_filter(const SplittingPropagator& propagator, const GshsModel& model, const DensityGrid& p0,
                        const std::vector<TimedMeasurement>& measurements, double horizon,
                        const FilterOptions& options) {
  const double dt = propagator.dt();
  const int m = step_count(horizon, dt);
  std::vector<const TimedMeasurement*> at_step(static_cast<std::size_t>(m) + 1, nullptr);
  for (const auto& tm : measurements) {
    const int k = static_cast<int>(std::round(tm.time / dt));
    if (k < 0 || std::abs(k * dt - tm.time) > 1e-9 * std::max(1.0, std::abs(tm.time))) {
      throw std::invalid_argument("measurement time " + std::to_string(tm.time) + " is not a multiple of dt");
    }
    if (k > m) continue;
    if (at_step[static_cast<std::size_t>(k)] != nullptr) {
      throw std::invalid_argument("two measurements at time " + std::to_string(tm.time));
    }
    at_step[static_cast<std::size_t>(k)] = &tm;
  }
  std::vector<bool> keep(static_cast<std::size_t>(m) + 1, false);
  for (double t : options.snapshot_times) {
    const int k = static_cast<int>(std::round(t / dt));
    if (k >= 0 && k <= m) keep[static_cast<std::size_t>(k)] = true;
  }

  FilterResult result;
  DensityGrid p = p0;
  auto finish_step = [&](int k, const TimedMeasurement* tm) {
    FilterStep step;
    step.time = k * dt;
    step.corrected = tm != nullptr;
    if (tm != nullptr) step.z = tm->z;
    step.estimate = point_estimates(p, model.angular_axes, false);
    result.steps.push_back(std::move(step));
    if (keep[static_cast<std::size_t>(k)]) result.snapshots.push_back({k * dt, p});
  };

  if (at_step[0] != nullptr) p = correct(p, at_step[0]->z, model, options.correction);
  finish_step(0, at_step[0]);
  for (int k = 1; k <= m; ++k) {
    const auto start = std::chrono::steady_clock::now();
    const TimedMeasurement* tm = at_step[static_cast<std::size_t>(k)];
    DensityGrid prior = propagator.step(p, (k - 1) * dt);
    p = tm != nullptr ? correct(prior, tm->z, model, options.correction)
                      : threshold_renormalize(prior, options.propagation);
    result.step_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    finish_step(k, tm);
  }
  result.final_density = std::move(p);
  return result;
}

}  // namespace gshs
