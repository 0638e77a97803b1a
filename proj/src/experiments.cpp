#include "gshs/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "gshs/dump.hpp"
#include "gshs/errors.hpp"
#include "gshs/models.hpp"
#include "gshs/particle_filter.hpp"

namespace gshs {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kBall = "bouncing-ball";
const char* const kDubins = "dubins";

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

ThresholdPolicy parse_threshold(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "none") return NoThreshold{};
    throw ConfigError("threshold must be \"none\" or an object");
  }
  check_keys(j, {"absolute", "peak_fraction"}, "threshold");
  if (j.size() != 1) throw ConfigError("threshold needs exactly one of 'absolute', 'peak_fraction'");
  if (j.contains("absolute")) {
    const double level = get_as<double>(j, "absolute");
    if (!(level >= 0.0)) throw ConfigError("threshold.absolute must be nonnegative");
    return AbsoluteThreshold{level};
  }
  const double fraction = get_as<double>(j, "peak_fraction");
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("threshold.peak_fraction must lie in [0, 1)");
  return PeakFractionThreshold{fraction};
}

json threshold_json(const ThresholdPolicy& policy) {
  if (const auto* a = std::get_if<AbsoluteThreshold>(&policy)) return {{"absolute", a->level}};
  if (const auto* p = std::get_if<PeakFractionThreshold>(&policy)) return {{"peak_fraction", p->fraction}};
  return "none";
}

BouncingBallParams ball_params(const json& j) {
  check_keys(j, {"g", "nu", "sigma_v", "c", "sigma_c", "sigma_m"}, "bouncing-ball params");
  BouncingBallParams p;
  if (j.contains("g")) p.g = get_as<double>(j, "g");
  if (j.contains("nu")) p.drag = get_as<double>(j, "nu");
  if (j.contains("sigma_v")) p.sigma_v = get_as<double>(j, "sigma_v");
  if (j.contains("c")) p.restitution = get_as<double>(j, "c");
  if (j.contains("sigma_c")) p.sigma_c = get_as<double>(j, "sigma_c");
  if (j.contains("sigma_m")) p.sigma_m = get_as<double>(j, "sigma_m");
  return p;
}

json ball_params_json(const BouncingBallParams& p) {
  return {{"g", p.g}, {"nu", p.drag}, {"sigma_v", p.sigma_v}, {"c", p.restitution}, {"sigma_c", p.sigma_c},
          {"sigma_m", p.sigma_m}};
}

DubinsParams dubins_params(const json& j) {
  check_keys(j, {"v", "a", "sigma_u", "obstacles", "d", "sigma_l", "kappa_l", "lidar"}, "dubins params");
  DubinsParams p;
  if (j.contains("v")) p.speed = get_as<double>(j, "v");
  if (j.contains("a")) p.turn_rate = get_as<double>(j, "a");
  if (j.contains("sigma_u")) p.sigma_u = get_as<double>(j, "sigma_u");
  if (j.contains("obstacles")) p.obstacles = get_as<std::vector<std::array<double, 2>>>(j, "obstacles");
  if (j.contains("d")) p.turn_distance = get_as<double>(j, "d");
  if (j.contains("sigma_l")) p.sigma_l = get_as<double>(j, "sigma_l");
  if (j.contains("kappa_l")) p.kappa_l = get_as<double>(j, "kappa_l");
  if (j.contains("lidar")) p.lidar = get_as<std::array<double, 2>>(j, "lidar");
  if (p.obstacles.empty()) throw ConfigError("dubins params: at least one obstacle is required");
  return p;
}

json dubins_params_json(const DubinsParams& p) {
  return {{"v", p.speed},     {"a", p.turn_rate},     {"sigma_u", p.sigma_u}, {"obstacles", p.obstacles},
          {"d", p.turn_distance}, {"sigma_l", p.sigma_l}, {"kappa_l", p.kappa_l}, {"lidar", p.lidar}};
}

std::vector<double> multiples(double step, double last) {
  std::vector<double> out;
  for (int k = 0; k * step <= last + 1e-9; ++k) out.push_back(k * step);
  return out;
}

std::string time_tag(double t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << t;
  return os.str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << std::setw(2) << j << '\n';
}

void ensure_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
}

void write_manifest(const fs::path& out, const std::string& command, const ExperimentConfig& cfg,
                    const std::vector<fs::path>& files) {
  json names = json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  write_json(out / "manifest.json", {{"command", command}, {"config", to_json(cfg)}, {"files", names}});
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

EstimateSummary summarize(const std::vector<RunMetrics>& runs, const std::vector<std::string>& names) {
  EstimateSummary s;
  s.runs = runs;
  s.metric_names = names;
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<double> column;
    for (const auto& r : runs) {
      if (m < r.values.size()) column.push_back(r.values[m]);
    }
    s.mean.push_back(mean_of(column));
    s.stddev.push_back(stddev_of(column));
  }
  return s;
}

json summary_json(const EstimateSummary& s) {
  json metrics = json::object();
  for (std::size_t m = 0; m < s.metric_names.size(); ++m) {
    metrics[s.metric_names[m]] = {{"mean", s.mean[m]}, {"std", s.stddev[m]}};
  }
  std::vector<double> steps;
  for (const auto& r : s.runs) steps.push_back(r.mean_step_seconds);
  return {{"runs", s.runs.size()}, {"metrics", metrics}, {"mean_step_seconds", mean_of(steps)}};
}

void write_estimates_csv(const fs::path& path, const GshsModel& model, const std::vector<FilterStep>& steps,
                         const Execution* truth) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  const int dims = model.num_axes;
  os << "time";
  if (truth != nullptr) {
    for (int k = 0; k < dims; ++k) os << ",truth_r" << k;
    os << ",truth_mode";
  }
  for (int k = 0; k < model.measurement_dim; ++k) os << ",z" << k;
  for (int k = 0; k < dims; ++k) os << ",mean_r" << k;
  for (int k = 0; k < dims; ++k) os << ",map_r" << k;
  os << ",map_mode";
  for (int s = 0; s < model.mode_count; ++s) os << ",p_mode" << s;
  for (int k = 0; k < dims; ++k) os << ",sd_r" << k;
  os << '\n' << std::setprecision(10);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& st = steps[i];
    os << st.time;
    if (truth != nullptr) {
      for (int k = 0; k < dims; ++k) os << ',' << truth->states[i].r[k];
      os << ',' << truth->states[i].s;
    }
    for (int k = 0; k < model.measurement_dim; ++k) {
      os << ',';
      if (st.z) os << (*st.z)[k];
    }
    for (int k = 0; k < dims; ++k) os << ',' << st.estimate.mean[k];
    for (int k = 0; k < dims; ++k) os << ',' << st.estimate.map_state.r[k];
    os << ',' << st.estimate.map_state.s;
    for (int s = 0; s < model.mode_count; ++s) os << ',' << st.estimate.mode_marginal[s];
    for (int k = 0; k < dims; ++k) os << ',' << st.estimate.stddev[k];
    os << '\n';
  }
}

FilterOptions filter_options(const ExperimentConfig& cfg) {
  FilterOptions options;
  options.propagation = cfg.threshold;
  options.correction = cfg.correction_threshold;
  options.snapshot_times = cfg.snapshot_times;
  return options;
}

}  // namespace

std::vector<std::string> registered_models() { return {kBall, kDubins}; }

ExperimentConfig parse_config(const json& j) {
  check_keys(j, {"model", "params", "grid", "dt", "horizon", "output_times", "threshold", "seed", "measurements",
                 "estimation", "baselines"},
             "config");
  ExperimentConfig cfg;
  cfg.model = get_as<std::string>(j, "model");
  if (cfg.model != kBall && cfg.model != kDubins) throw ConfigError("unknown model '" + cfg.model + "'");
  const bool ball = cfg.model == kBall;
  if (j.contains("params")) cfg.params = j.at("params");
  // Validates the overrides.
  if (ball) {
    cfg.params = ball_params_json(ball_params(cfg.params));
  } else {
    cfg.params = dubins_params_json(dubins_params(cfg.params));
  }

  cfg.grid = ball ? bouncing_ball_grid() : dubins_grid();
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"counts", "lengths", "offsets"}, "grid");
    auto counts = g.contains("counts") ? get_as<std::vector<int>>(g, "counts") : cfg.grid.counts();
    auto lengths = g.contains("lengths") ? get_as<std::vector<double>>(g, "lengths") : cfg.grid.lengths();
    auto offsets = g.contains("offsets") ? get_as<std::vector<double>>(g, "offsets") : cfg.grid.offsets();
    const auto axes = static_cast<std::size_t>(ball ? 2 : 3);
    if (counts.size() != axes || lengths.size() != axes || offsets.size() != axes) {
      throw ConfigError("grid must have " + std::to_string(axes) + " axes for model '" + cfg.model + "'");
    }
    try {
      cfg.grid = GridSpec(counts, lengths, offsets, cfg.grid.mode_count());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  }

  cfg.dt = j.contains("dt") ? get_as<double>(j, "dt") : 0.025;
  cfg.horizon = j.contains("horizon") ? get_as<double>(j, "horizon") : (ball ? 6.0 : 4.0);
  try {
    step_count(cfg.horizon, cfg.dt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("dt/horizon: ") + e.what());
  }
  cfg.output_times = j.contains("output_times") ? get_as<std::vector<double>>(j, "output_times")
                                                : multiples(ball ? 0.6 : 0.4, std::min(cfg.horizon, ball ? 5.4 : 3.6));
  for (double t : cfg.output_times) {
    const double k = std::round(t / cfg.dt);
    if (t < 0.0 || t > cfg.horizon + 1e-9 || std::abs(k * cfg.dt - t) > 1e-9 * std::max(1.0, t)) {
      throw ConfigError("output time " + std::to_string(t) + " is not a step time within the horizon");
    }
  }
  if (j.contains("threshold")) cfg.threshold = parse_threshold(j.at("threshold"));
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j, "seed");

  if (j.contains("measurements")) {
    const json& m = j.at("measurements");
    check_keys(m, {"source", "path"}, "measurements");
    const auto source = get_as<std::string>(m, "source");
    if (source == "simulate") {
      cfg.measurement_source = MeasurementSource::kSimulate;
    } else if (source == "file") {
      cfg.measurement_source = MeasurementSource::kFile;
      cfg.measurement_file = get_as<std::string>(m, "path");
    } else {
      throw ConfigError("measurements.source must be 'simulate' or 'file'");
    }
  }
  cfg.snapshot_times = cfg.output_times;
  if (j.contains("estimation")) {
    const json& e = j.at("estimation");
    check_keys(e, {"runs", "snapshot_times", "threshold"}, "estimation");
    if (e.contains("runs")) cfg.runs = get_as<int>(e, "runs");
    if (cfg.runs < 1) throw ConfigError("estimation.runs must be positive");
    if (e.contains("snapshot_times")) cfg.snapshot_times = get_as<std::vector<double>>(e, "snapshot_times");
    if (e.contains("threshold")) cfg.correction_threshold = parse_threshold(e.at("threshold"));
  }
  if (j.contains("baselines")) {
    const json& b = j.at("baselines");
    check_keys(b, {"montecarlo", "particle"}, "baselines");
    if (b.contains("montecarlo")) {
      const json& mc = b.at("montecarlo");
      check_keys(mc, {"samples", "substeps"}, "baselines.montecarlo");
      cfg.montecarlo = true;
      if (mc.contains("samples")) cfg.montecarlo_samples = get_as<Index>(mc, "samples");
      if (mc.contains("substeps")) cfg.montecarlo_substeps = get_as<int>(mc, "substeps");
      if (cfg.montecarlo_samples < 1) throw ConfigError("baselines.montecarlo.samples must be positive");
      if (cfg.montecarlo_substeps < 1) throw ConfigError("baselines.montecarlo.substeps must be positive");
    }
    if (b.contains("particle")) {
      check_keys(b.at("particle"), {"particles"}, "baselines.particle");
      cfg.particle = true;
      if (b.at("particle").contains("particles")) cfg.particles = get_as<Index>(b.at("particle"), "particles");
      if (cfg.particles < 1) throw ConfigError("baselines.particle.particles must be positive");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = cfg.model;
  j["params"] = cfg.params;
  j["grid"] = {{"counts", cfg.grid.counts()}, {"lengths", cfg.grid.lengths()}, {"offsets", cfg.grid.offsets()}};
  j["dt"] = cfg.dt;
  j["horizon"] = cfg.horizon;
  j["output_times"] = cfg.output_times;
  j["threshold"] = threshold_json(cfg.threshold);
  j["seed"] = cfg.seed;
  if (cfg.measurement_source == MeasurementSource::kFile) {
    j["measurements"] = {{"source", "file"}, {"path", cfg.measurement_file.string()}};
  } else {
    j["measurements"] = {{"source", "simulate"}};
  }
  j["estimation"] = {{"runs", cfg.runs},
                     {"snapshot_times", cfg.snapshot_times},
                     {"threshold", threshold_json(cfg.correction_threshold)}};
  json baselines = json::object();
  if (cfg.montecarlo) baselines["montecarlo"] = {{"samples", cfg.montecarlo_samples}, {"substeps", cfg.montecarlo_substeps}};
  if (cfg.particle) baselines["particle"] = {{"particles", cfg.particles}};
  j["baselines"] = baselines;
  return j;
}

ExampleSetup make_setup(const ExperimentConfig& cfg) {
  if (cfg.model == kBall) {
    return {bouncing_ball_model(ball_params(cfg.params)), cfg.grid, bouncing_ball_estimation_prior()};
  }
  if (cfg.model == kDubins) {
    return {dubins_model(dubins_params(cfg.params)), cfg.grid, dubins_estimation_prior()};
  }
  throw ConfigError("unknown model '" + cfg.model + "'");
}

double RunMetrics::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::out_of_range("no metric named " + name);
}

std::vector<std::string> metric_names(const std::string& model) {
  if (model == kBall) return {"position", "velocity"};
  if (model == kDubins) return {"y1", "y2", "theta", "mode"};
  throw ConfigError("unknown model '" + model + "'");
}

SimulatedRun simulate_run(const ExampleSetup& setup, double horizon, double dt, std::uint64_t seed, int run) {
  const auto index = static_cast<std::uint64_t>(run);
  RandomSource truth_rng = stream_for(seed, 2 * index);
  RandomSource noise_rng = stream_for(seed, 2 * index + 1);
  SimulatedRun sim;
  const HybridState x0 = setup.model.initial.sample(truth_rng);
  sim.truth = sample_path(setup.model, x0, horizon, dt, truth_rng);
  for (std::size_t k = 1; k < sim.truth.states.size(); ++k) {
    sim.measurements.push_back({sim.truth.times[k], setup.model.measure(sim.truth.states[k], noise_rng)});
  }
  return sim;
}

RunMetrics score_run(const std::string& model, const std::vector<FilterStep>& steps, const Execution& truth) {
  RunMetrics metrics;
  metrics.names = metric_names(model);
  metrics.values.assign(metrics.names.size(), 0.0);
  const std::size_t n = std::min(steps.size(), truth.states.size());
  if (n < 2) return metrics;
  for (std::size_t k = 1; k < n; ++k) {
    const auto& est = steps[k].estimate;
    const auto& x = truth.states[k];
    if (model == kBall) {
      metrics.values[0] += std::abs(est.map_state.r[0] - x.r[0]);
      metrics.values[1] += std::abs(est.map_state.r[1] - x.r[1]);
    } else {
      metrics.values[0] += std::abs(est.mean[0] - x.r[0]);
      metrics.values[1] += std::abs(est.mean[1] - x.r[1]);
      metrics.values[2] += std::abs(wrap_to_pi(est.mean_direction[2] - x.r[2]));
      metrics.values[3] += est.mode_estimate() != x.s ? 100.0 : 0.0;
    }
  }
  for (double& v : metrics.values) v /= static_cast<double>(n - 1);
  return metrics;
}

EstimationRun run_estimation(const ExampleSetup& setup, const ExperimentConfig& cfg,
                             const SplittingPropagator& propagator, int run) {
  EstimationRun result;
  result.simulated = simulate_run(setup, cfg.horizon, cfg.dt, cfg.seed, run);
  const DensityGrid p0 = density_from(setup.estimation_prior, propagator.grid());
  result.filter = run_filter(propagator, setup.model, p0, result.simulated.measurements, cfg.horizon, filter_options(cfg));
  result.metrics = score_run(cfg.model, result.filter.steps, result.simulated.truth);
  result.metrics.mean_step_seconds = mean_of(result.filter.step_seconds);
  return result;
}

ParticleRun run_particle_filter(const ExampleSetup& setup, const ExperimentConfig& cfg, const SimulatedRun& sim,
                                int run) {
  // Particle streams start far from the truth/noise streams of simulate_run.
  std::uint64_t base = cfg.seed ^ 0x5DEECE66DULL;
  base = splitmix64(base) + static_cast<std::uint64_t>(run) * static_cast<std::uint64_t>(cfg.particles);
  ParticleEnsemble ens = make_ensemble(setup.estimation_prior, cfg.particles, base);
  RandomSource resample_rng(base - 1);
  ParticleRun out;
  auto estimate = [&](double t, const std::optional<Measurement>& z) {
    FilterStep step;
    step.time = t;
    step.corrected = z.has_value();
    step.z = z;
    Histogram h = pf_density(ens, setup.grid, setup.model.angular_axes);
    step.estimate = point_estimates(h.density, setup.model.angular_axes, false);
    out.steps.push_back(std::move(step));
  };
  estimate(0.0, std::nullopt);
  const int m = step_count(cfg.horizon, cfg.dt);
  for (int k = 1; k <= m; ++k) {
    const auto start = std::chrono::steady_clock::now();
    std::optional<Measurement> z;
    if (static_cast<std::size_t>(k - 1) < sim.measurements.size()) z = sim.measurements[static_cast<std::size_t>(k - 1)].z;
    pf_step(setup.model, ens, z, (k - 1) * cfg.dt, cfg.dt, resample_rng);
    estimate(k * cfg.dt, z);
    out.step_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  out.metrics = score_run(cfg.model, out.steps, sim.truth);
  out.metrics.mean_step_seconds = mean_of(out.step_seconds);
  return out;
}

PropagateSummary cmd_propagate(const ExperimentConfig& cfg, const fs::path& out) {
  ensure_dir(out);
  const ExampleSetup setup = make_setup(cfg);
  const SplittingPropagator propagator(setup.model, setup.grid, cfg.dt);
  const DensityGrid p0 = initial_density(setup.model, setup.grid);
  const auto result = propagate(propagator, p0, cfg.horizon, cfg.threshold, cfg.output_times);

  PropagateSummary summary;
  std::vector<fs::path> files;
  for (const auto& snap : result.snapshots) {
    const fs::path path = out / ("density_t" + time_tag(snap.time) + ".dgrd");
    write_dgrd(path, snap.density, snap.time);
    summary.dumps.push_back(path);
    files.push_back(path);
  }
  summary.step_seconds = result.step_seconds;
  summary.mean_step_seconds = mean_of(result.step_seconds);
  {
    std::ofstream os(out / "timings.csv");
    os << "step,time,seconds\n" << std::setprecision(10);
    for (std::size_t k = 0; k < result.step_seconds.size(); ++k) {
      os << k + 1 << ',' << (k + 1) * cfg.dt << ',' << result.step_seconds[k] << '\n';
    }
  }
  files.push_back(out / "timings.csv");
  write_json(out / "summary.json", {{"steps", result.step_seconds.size()},
                                    {"mean_step_seconds", summary.mean_step_seconds},
                                    {"total_seconds", std::accumulate(result.step_seconds.begin(),
                                                                      result.step_seconds.end(), 0.0)},
                                    {"continuous_method", static_cast<int>(propagator.continuous().method(0))},
                                    {"final_mass", mass(result.final_density)}});
  files.push_back(out / "summary.json");
  write_manifest(out, "propagate", cfg, files);
  return summary;
}

std::vector<TimedMeasurement> read_measurements(const fs::path& path, int dim) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open measurement file " + path.string());
  std::string line;
  std::vector<TimedMeasurement> out;
  if (!std::getline(is, line)) return out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::vector<double> fields;
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        fields.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("measurement file line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw ConfigError("measurement file line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                        " measurement components, got " + std::to_string(static_cast<int>(fields.size()) - 1));
    }
    TimedMeasurement tm;
    tm.time = fields[0];
    tm.z = Eigen::Map<Eigen::VectorXd>(fields.data() + 1, dim);
    out.push_back(std::move(tm));
  }
  return out;
}

void write_measurements(const fs::path& path, const std::vector<TimedMeasurement>& measurements, int dim) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "time";
  for (int k = 0; k < dim; ++k) os << ",z" << k;
  os << '\n' << std::setprecision(17);
  for (const auto& tm : measurements) {
    os << tm.time;
    for (int k = 0; k < dim; ++k) os << ',' << tm.z[k];
    os << '\n';
  }
}

EstimateSummary cmd_estimate(const ExperimentConfig& cfg, const fs::path& out) {
  ensure_dir(out);
  const ExampleSetup setup = make_setup(cfg);
  const SplittingPropagator propagator(setup.model, setup.grid, cfg.dt);
  std::vector<fs::path> files;
  auto dump_snapshots = [&](const FilterResult& result, const std::string& prefix) {
    for (const auto& snap : result.snapshots) {
      const fs::path path = out / (prefix + "_t" + time_tag(snap.time) + ".dgrd");
      write_dgrd(path, snap.density, snap.time);
      files.push_back(path);
    }
  };

  std::vector<RunMetrics> runs;
  if (cfg.measurement_source == MeasurementSource::kFile) {
    const auto measurements = read_measurements(cfg.measurement_file, setup.model.measurement_dim);
    const DensityGrid p0 = density_from(setup.estimation_prior, setup.grid);
    const auto result = run_filter(propagator, setup.model, p0, measurements, cfg.horizon, filter_options(cfg));
    write_estimates_csv(out / "estimates.csv", setup.model, result.steps, nullptr);
    files.push_back(out / "estimates.csv");
    dump_snapshots(result, "posterior");
    RunMetrics m;
    m.mean_step_seconds = mean_of(result.step_seconds);
    runs.push_back(m);
  } else {
    std::ofstream errors(out / "errors.csv");
    const auto names = metric_names(cfg.model);
    errors << "run";
    for (const auto& n : names) errors << ',' << n;
    errors << ",mean_step_seconds\n" << std::setprecision(10);
    for (int r = 0; r < cfg.runs; ++r) {
      const auto run = run_estimation(setup, cfg, propagator, r);
      const std::string tag = "run" + std::to_string(r);
      write_estimates_csv(out / ("estimates_" + tag + ".csv"), setup.model, run.filter.steps, &run.simulated.truth);
      write_measurements(out / ("measurements_" + tag + ".csv"), run.simulated.measurements,
                         setup.model.measurement_dim);
      files.push_back(out / ("estimates_" + tag + ".csv"));
      files.push_back(out / ("measurements_" + tag + ".csv"));
      dump_snapshots(run.filter, "posterior_" + tag);
      errors << r;
      for (double v : run.metrics.values) errors << ',' << v;
      errors << ',' << run.metrics.mean_step_seconds << '\n';
      runs.push_back(run.metrics);
    }
    files.push_back(out / "errors.csv");
  }
  const auto summary =
      summarize(runs, cfg.measurement_source == MeasurementSource::kFile ? std::vector<std::string>{}
                                                                         : metric_names(cfg.model));
  write_json(out / "summary.json", summary_json(summary));
  files.push_back(out / "summary.json");
  write_manifest(out, "estimate", cfg, files);
  return summary;
}

CompareSummary cmd_compare(const ExperimentConfig& cfg, const fs::path& out) {
  ensure_dir(out);
  const ExampleSetup setup = make_setup(cfg);
  const SplittingPropagator propagator(setup.model, setup.grid, cfg.dt);
  CompareSummary summary;
  json report;

  const DensityGrid p0 = initial_density(setup.model, setup.grid);
  const auto spectral = propagate(propagator, p0, cfg.horizon, cfg.threshold, cfg.output_times);
  summary.spectral_step_seconds = mean_of(spectral.step_seconds);
  report["spectral"] = {{"mean_step_seconds", summary.spectral_step_seconds}, {"steps", spectral.step_seconds.size()}};

  if (cfg.montecarlo) {
    MonteCarloEnsemble mc(setup.model, setup.model.initial, cfg.montecarlo_samples, cfg.seed);
    std::vector<double> mc_seconds;
    double worst_drop = 0.0;
    std::size_t next = 0;
    const int m = step_count(cfg.horizon, cfg.dt);
    auto compare_at = [&](int k, const Histogram& h) {
      while (next < spectral.snapshots.size() && std::round(spectral.snapshots[next].time / cfg.dt) < k) ++next;
      if (next < spectral.snapshots.size() && std::round(spectral.snapshots[next].time / cfg.dt) == k) {
        summary.times.push_back(spectral.snapshots[next].time);
        summary.l1_distances.push_back(l1_distance(spectral.snapshots[next].density, h.density));
        worst_drop = std::max(worst_drop, h.drop_fraction);
      }
    };
    compare_at(0, histogram_density(mc.states(), setup.grid, setup.model.angular_axes));
    for (int k = 1; k <= m; ++k) {
      // One Monte Carlo step moves every sample and counts them on the grid.
      const auto start = std::chrono::steady_clock::now();
      mc.step(cfg.dt, cfg.montecarlo_substeps);
      const Histogram h = histogram_density(mc.states(), setup.grid, setup.model.angular_axes);
      mc_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      compare_at(k, h);
    }
    summary.montecarlo_step_seconds = mean_of(mc_seconds);
    summary.montecarlo_drop_fraction = worst_drop;
    json panels = json::array();
    for (std::size_t i = 0; i < summary.times.size(); ++i) {
      panels.push_back({{"time", summary.times[i]}, {"l1", summary.l1_distances[i]}});
    }
    report["montecarlo"] = {{"samples", cfg.montecarlo_samples},
                            {"substeps", cfg.montecarlo_substeps},
                            {"mean_step_seconds", *summary.montecarlo_step_seconds},
                            {"max_drop_fraction", worst_drop},
                            {"l1", panels},
                            {"step_time_ratio", *summary.montecarlo_step_seconds / summary.spectral_step_seconds}};
  }

  if (cfg.particle) {
    std::vector<RunMetrics> spectral_runs, particle_runs;
    std::vector<double> spectral_steps, particle_steps;
    for (int r = 0; r < cfg.runs; ++r) {
      const auto run = run_estimation(setup, cfg, propagator, r);
      const auto pf = run_particle_filter(setup, cfg, run.simulated, r);
      spectral_runs.push_back(run.metrics);
      particle_runs.push_back(pf.metrics);
      spectral_steps.push_back(run.metrics.mean_step_seconds);
      particle_steps.push_back(pf.metrics.mean_step_seconds);
    }
    summary.spectral_estimation = summarize(spectral_runs, metric_names(cfg.model));
    summary.particle_estimation = summarize(particle_runs, metric_names(cfg.model));
    summary.estimation_step_seconds = mean_of(spectral_steps);
    summary.particle_step_seconds = mean_of(particle_steps);
    report["estimation"] = {{"spectral", summary_json(*summary.spectral_estimation)},
                            {"particle", summary_json(*summary.particle_estimation)},
                            {"particles", cfg.particles}};
  }

  write_json(out / "report.json", report);
  std::vector<fs::path> files{out / "report.json"};
  if (!summary.times.empty()) {
    std::ofstream os(out / "compare.csv");
    os << "time,l1\n" << std::setprecision(10);
    for (std::size_t i = 0; i < summary.times.size(); ++i) os << summary.times[i] << ',' << summary.l1_distances[i] << '\n';
    files.push_back(out / "compare.csv");
  }
  write_manifest(out, "compare", cfg, files);
  return summary;
}

}  // namespace gshs
