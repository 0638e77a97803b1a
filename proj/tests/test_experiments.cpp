#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "gshs/dump.hpp"
#include "gshs/errors.hpp"
#include "gshs/experiments.hpp"
#include "gshs/models.hpp"

using namespace gshs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gshs_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json small_ball() {
  return json::parse(R"({"model": "bouncing-ball", "grid": {"counts": [20, 20]}, "dt": 0.05, "horizon": 0.2,
                         "output_times": [0.0, 0.1, 0.2]})");
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("GSHS_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults") {
  const auto cfg = parse_config(json{{"model", "bouncing-ball"}});
  CHECK(cfg.grid.counts() == std::vector<int>{100, 100});
  CHECK(cfg.dt == 0.025);
  CHECK(cfg.horizon == 6.0);
  REQUIRE(cfg.output_times.size() == 10);
  CHECK(cfg.output_times.back() == doctest::Approx(5.4));
  CHECK(describe(cfg.threshold) == "absolute 0.003");
  CHECK(cfg.snapshot_times == cfg.output_times);
  CHECK_FALSE(cfg.montecarlo);

  const auto dub = parse_config(json{{"model", "dubins"}});
  CHECK(dub.grid.num_axes() == 3);
  CHECK(dub.grid.mode_count() == 3);
  CHECK(dub.horizon == 4.0);
}

TEST_CASE("config schema errors") {
  CHECK_THROWS_AS(parse_config(json{{"model", "pendulum"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json::object()), ConfigError);
  auto bad = [](const char* patch) {
    json j = small_ball();
    j.merge_patch(json::parse(patch));
    return j;
  };
  CHECK_THROWS_AS(parse_config(bad(R"({"colour": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"params": {"gravity": 9}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"grid": {"counts": [20, 20, 20]}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"grid": {"counts": [21, 20]}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"dt": "fast"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"horizon": 0.23})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"output_times": [0.07]})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"threshold": {"absolute": -1}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"threshold": {"absolute": 1, "peak_fraction": 0.1}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"measurements": {"source": "radio"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"estimation": {"runs": 0}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"baselines": {"montecarlo": {"samples": 0}}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"baselines": {"montecarlo": {"substeps": 0}}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(bad(R"({"baselines": {"kalman": {}}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "dubins", "params": {"obstacles": []}})")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("resolved config round trips") {
  json j = small_ball();
  j["params"] = {{"sigma_m", 0.3}};
  j["threshold"] = {{"peak_fraction", 0.025}};
  j["baselines"] = {{"montecarlo", {{"samples", 500}, {"substeps", 4}}}, {"particle", {{"particles", 300}}}};
  j["estimation"] = {{"runs", 3}, {"threshold", "none"}};
  j["measurements"] = {{"source", "file"}, {"path", "z.csv"}};
  const auto cfg = parse_config(j);
  const json resolved = to_json(cfg);
  CHECK(resolved["params"]["sigma_m"] == 0.3);
  CHECK(resolved["params"]["g"] == 9.8);
  CHECK(resolved["baselines"]["montecarlo"]["substeps"] == 4);
  const auto again = parse_config(resolved);
  CHECK(to_json(again) == resolved);
  CHECK(again.montecarlo_samples == 500);
  CHECK(again.montecarlo_substeps == 4);
  CHECK(again.particles == 300);
  CHECK(again.runs == 3);
  CHECK(again.measurement_source == MeasurementSource::kFile);
  CHECK(again.measurement_file == "z.csv");
  CHECK(describe(again.correction_threshold) == "none");
}

TEST_CASE("setup applies parameter overrides") {
  json j = small_ball();
  j["params"] = {{"c", 0.5}, {"sigma_m", 0.3}};
  const auto setup = make_setup(parse_config(j));
  CHECK(setup.grid.counts() == std::vector<int>{20, 20});
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(1, 1.0);
  const double near = setup.model.likelihood(z, Eigen::Vector2d(1.0, 0.0), 0);
  CHECK(near == doctest::Approx(1.0 / (0.3 * std::sqrt(2.0 * M_PI))));
  CHECK(registered_models() == std::vector<std::string>{"bouncing-ball", "dubins"});
  ExperimentConfig unknown;
  unknown.model = "pendulum";
  CHECK_THROWS_AS(make_setup(unknown), ConfigError);
  CHECK_THROWS_AS(metric_names("pendulum"), ConfigError);
}

TEST_CASE("measurement files round trip") {
  const fs::path dir = scratch("measurements");
  std::vector<TimedMeasurement> zs = {{0.025, Eigen::Vector2d(1.0 / 3.0, -2.5)}, {0.05, Eigen::Vector2d(4.0, 1e-9)}};
  write_measurements(dir / "z.csv", zs, 2);
  const auto back = read_measurements(dir / "z.csv", 2);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].time == zs[i].time);
    CHECK(back[i].z == zs[i].z);
  }
  CHECK_THROWS_AS(read_measurements(dir / "z.csv", 1), ConfigError);
  {
    std::ofstream os(dir / "bad.csv");
    os << "time,z0\n0.1,abc\n";
  }
  CHECK_THROWS_AS(read_measurements(dir / "bad.csv", 1), ConfigError);
  CHECK_THROWS_AS(read_measurements(dir / "missing.csv", 1), ConfigError);
}

TEST_CASE("propagate writes dumps and bookkeeping") {
  const fs::path dir = scratch("propagate");
  const auto cfg = parse_config(small_ball());
  const auto summary = cmd_propagate(cfg, dir);
  REQUIRE(summary.dumps.size() == 3);
  CHECK(summary.step_seconds.size() == 4);
  const auto first = read_dgrd(summary.dumps[0]);
  CHECK(first.time == 0.0);
  const auto setup = make_setup(cfg);
  CHECK(first.density.values() == initial_density(setup.model, setup.grid).values());
  const auto last = read_dgrd(dir / "density_t0.200.dgrd");
  CHECK(last.time == doctest::Approx(0.2));
  CHECK(mass(last.density) == doctest::Approx(1.0).epsilon(1e-12));

  std::ifstream timings(dir / "timings.csv");
  std::string header;
  std::getline(timings, header);
  CHECK(header == "step,time,seconds");
  int rows = 0;
  for (std::string line; std::getline(timings, line);) ++rows;
  CHECK(rows == 4);

  const json s = read_json(dir / "summary.json");
  CHECK(s["steps"] == 4);
  CHECK(s["final_mass"].get<double>() == doctest::Approx(1.0));
  const json manifest = read_json(dir / "manifest.json");
  CHECK(manifest["command"] == "propagate");
  CHECK(manifest["config"] == to_json(cfg));
  CHECK(manifest["files"].size() == 5);
}

TEST_CASE("zero horizon gives a single dump of the initial density") {
  json j = small_ball();
  j["horizon"] = 0.0;
  j["output_times"] = {0.0};
  const fs::path dir = scratch("zero");
  const auto cfg = parse_config(j);
  const auto summary = cmd_propagate(cfg, dir);
  REQUIRE(summary.dumps.size() == 1);
  CHECK(summary.step_seconds.empty());
  const auto setup = make_setup(cfg);
  CHECK(read_dgrd(summary.dumps[0]).density.values() == initial_density(setup.model, setup.grid).values());
}

TEST_CASE("estimate replays a measurement file") {
  const fs::path dir = scratch("estimate_file");
  write_measurements(dir / "empty.csv", {}, 1);
  json j = small_ball();
  j["measurements"] = {{"source", "file"}, {"path", (dir / "empty.csv").string()}};
  j["estimation"] = {{"snapshot_times", {0.2}}};
  const auto cfg = parse_config(j);
  cmd_estimate(cfg, dir / "out");
  // Without measurements the filter is plain propagation of the estimation prior.
  const auto setup = make_setup(cfg);
  const SplittingPropagator prop(setup.model, setup.grid, cfg.dt);
  const auto plain = propagate(prop, density_from(setup.estimation_prior, setup.grid), 0.2, cfg.threshold);
  const auto dumped = read_dgrd(dir / "out" / "posterior_t0.200.dgrd");
  CHECK(dumped.density.values() == plain.final_density.values());
  CHECK(fs::exists(dir / "out" / "estimates.csv"));
  CHECK(read_json(dir / "out" / "summary.json")["runs"] == 1);
}

TEST_CASE("estimate over simulated runs") {
  const fs::path dir = scratch("estimate_sim");
  json j = small_ball();
  j["estimation"] = {{"runs", 2}, {"snapshot_times", json::array()}};
  const auto summary = cmd_estimate(parse_config(j), dir);
  REQUIRE(summary.runs.size() == 2);
  CHECK(summary.metric_names == std::vector<std::string>{"position", "velocity"});
  for (const auto& r : summary.runs) CHECK(r.value("position") >= 0.0);
  CHECK_THROWS_AS(summary.runs[0].value("altitude"), std::out_of_range);
  CHECK(fs::exists(dir / "errors.csv"));
  CHECK(fs::exists(dir / "measurements_run1.csv"));
  const auto zs = read_measurements(dir / "measurements_run0.csv", 1);
  CHECK(zs.size() == 4);
  CHECK(zs.front().time == doctest::Approx(0.05));
  const json s = read_json(dir / "summary.json");
  CHECK(s["metrics"].contains("velocity"));
}

TEST_CASE("compare without baselines reports only the spectral timing") {
  const fs::path dir = scratch("compare_empty");
  const auto summary = cmd_compare(parse_config(small_ball()), dir);
  CHECK(summary.times.empty());
  CHECK_FALSE(summary.montecarlo_step_seconds);
  const json report = read_json(dir / "report.json");
  CHECK(report.contains("spectral"));
  CHECK_FALSE(report.contains("montecarlo"));
  CHECK_FALSE(fs::exists(dir / "compare.csv"));
}

TEST_CASE("compare against both baselines") {
  const fs::path dir = scratch("compare");
  json j = small_ball();
  j["baselines"] = {{"montecarlo", {{"samples", 2000}}}, {"particle", {{"particles", 200}}}};
  const auto summary = cmd_compare(parse_config(j), dir);
  REQUIRE(summary.times.size() == 3);
  CHECK(summary.l1_distances.size() == 3);
  for (double d : summary.l1_distances) {
    CHECK(d >= 0.0);
    CHECK(d <= 2.0);
  }
  REQUIRE(summary.particle_estimation);
  CHECK(summary.particle_estimation->runs.size() == 1);
  const json report = read_json(dir / "report.json");
  CHECK(report["montecarlo"]["substeps"] == 10);
  CHECK(report["montecarlo"]["l1"].size() == 3);
  CHECK(fs::exists(dir / "compare.csv"));
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  {
    std::ofstream os(dir / "ok.json");
    os << small_ball().dump();
    std::ofstream bad(dir / "bad.json");
    bad << R"({"model": "pendulum"})";
    std::ofstream broken(dir / "broken.json");
    broken << "{not json";
  }
  const std::string out = " --out " + (dir / "out").string();
  CHECK(run_cli("propagate --config " + (dir / "ok.json").string() + out) == 0);
  CHECK(fs::exists(dir / "out" / "density_t0.100.dgrd"));
  CHECK(run_cli("propagate --config " + (dir / "ok.json").string() + out + " --seed 5") == 0);
  CHECK(read_json(dir / "out" / "manifest.json")["config"]["seed"] == 5);
  CHECK(run_cli("propagate --config " + (dir / "bad.json").string() + out) == 2);
  CHECK(run_cli("propagate --config " + (dir / "broken.json").string() + out) == 2);
  CHECK(run_cli("propagate --config " + (dir / "missing.json").string() + out) == 2);
  CHECK(run_cli("propagate" + out) == 2);
  CHECK(run_cli("launch") == 2);
  CHECK(run_cli("--help") == 0);
}
