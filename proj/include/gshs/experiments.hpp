#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gshs/bayes.hpp"
#include "gshs/grid.hpp"
#include "gshs/model.hpp"
#include "gshs/monte_carlo.hpp"
#include "gshs/splitting.hpp"
#include "gshs/threshold.hpp"

namespace gshs {

enum class MeasurementSource { kSimulate, kFile };

/**
 * Resolved experiment configuration. JSON schema (every key optional except
 * "model"; defaults come from the model registry):
 *
 *   model          "bouncing-ball" | "dubins"
 *   params         model parameter overrides, e.g. {"sigma_m": 0.3}
 *   grid           {"counts": [...], "lengths": [...], "offsets": [...]}
 *   dt, horizon    seconds; horizon must be a multiple of dt
 *   output_times   dump times for propagate / compare
 *   threshold      "none" | {"absolute": x} | {"peak_fraction": x}
 *   seed           master seed
 *   measurements   {"source": "simulate"} | {"source": "file", "path": p}
 *   estimation     {"runs": n, "snapshot_times": [...], "threshold": ...}
 *   baselines      {"montecarlo": {"samples": n, "substeps": k},
 *                   "particle": {"particles": n}}
 */
struct ExperimentConfig {
  std::string model;
  nlohmann::json params = nlohmann::json::object();
  GridSpec grid;
  double dt = 0.025;
  double horizon = 0.0;
  std::vector<double> output_times;
  ThresholdPolicy threshold = AbsoluteThreshold{};
  std::uint64_t seed = 1;

  MeasurementSource measurement_source = MeasurementSource::kSimulate;
  std::filesystem::path measurement_file;

  int runs = 1;
  std::vector<double> snapshot_times;
  ThresholdPolicy correction_threshold = kEstimationThreshold;

  bool montecarlo = false;
  Index montecarlo_samples = 100000;
  /// Euler-Maruyama sub-intervals per dt for the oracle's motion; jumps are
  /// still tested once per dt.
  int montecarlo_substeps = 10;
  bool particle = false;
  Index particles = 100000;
};

/// Throws ConfigError on schema violations or an unknown model name.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved configuration, suitable for replaying the run.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// A registered model with its grid and estimation prior.
struct ExampleSetup {
  GshsModel model;
  GridSpec grid;
  Distribution estimation_prior;
};

std::vector<std::string> registered_models();
/// Builds the named model with parameter overrides; throws ConfigError
/// ("unknown model", unknown parameter keys).
ExampleSetup make_setup(const ExperimentConfig& cfg);

/// Time-averaged absolute errors of one estimation run, keyed by metric
/// name: position / velocity for the ball; y1, y2, theta, mode for Dubins.
struct RunMetrics {
  std::vector<std::string> names;
  std::vector<double> values;
  double mean_step_seconds = 0.0;
  double value(const std::string& name) const;
};

std::vector<std::string> metric_names(const std::string& model);

/// Synthetic truth and measurements for run index `run`.
struct SimulatedRun {
  Execution truth;
  std::vector<TimedMeasurement> measurements;
};
SimulatedRun simulate_run(const ExampleSetup& setup, double horizon, double dt, std::uint64_t seed, int run);

/// Errors of filter estimates against a truth path (steps k >= 1).
RunMetrics score_run(const std::string& model, const std::vector<FilterStep>& steps, const Execution& truth);

/// Grid Bayesian filter over one simulated run.
struct EstimationRun {
  SimulatedRun simulated;
  FilterResult filter;
  RunMetrics metrics;
};
EstimationRun run_estimation(const ExampleSetup& setup, const ExperimentConfig& cfg,
                             const SplittingPropagator& propagator, int run);

/// SIR particle filter on the same truth and measurements; estimates from the
/// particle histogram on the grid.
struct ParticleRun {
  std::vector<FilterStep> steps;
  std::vector<double> step_seconds;
  RunMetrics metrics;
};
ParticleRun run_particle_filter(const ExampleSetup& setup, const ExperimentConfig& cfg, const SimulatedRun& sim,
                                int run);

struct PropagateSummary {
  std::vector<std::filesystem::path> dumps;
  std::vector<double> step_seconds;
  double mean_step_seconds = 0.0;
};

struct EstimateSummary {
  std::vector<RunMetrics> runs;
  std::vector<std::string> metric_names;
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct CompareSummary {
  std::vector<double> times;
  std::vector<double> l1_distances;
  double spectral_step_seconds = 0.0;
  std::optional<double> montecarlo_step_seconds;
  std::optional<double> montecarlo_drop_fraction;
  std::optional<EstimateSummary> spectral_estimation;
  std::optional<EstimateSummary> particle_estimation;
  std::optional<double> particle_step_seconds;
  double estimation_step_seconds = 0.0;
};

/// Propagation: DGRD dumps at output_times, timings.csv, summary.json, manifest.json.
PropagateSummary cmd_propagate(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Estimation runs: per-run estimates CSV, posterior dumps, errors.csv, summary.json, manifest.json.
EstimateSummary cmd_estimate(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Solver against the configured baselines on identical seeds: report.json, manifest.json.
CompareSummary cmd_compare(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Measurement CSV with header "time,z0,..": read / write.
std::vector<TimedMeasurement> read_measurements(const std::filesystem::path& path, int dim);
void write_measurements(const std::filesystem::path& path, const std::vector<TimedMeasurement>& measurements, int dim);

}  // namespace gshs
