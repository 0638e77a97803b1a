#include <doctest.h>

#include "gshs/fourier.hpp"
#include "gshs/models.hpp"
#include "gshs/splitting.hpp"
#include "support.hpp"

using namespace gshs;
using test::kPi;

namespace {

DensityGrid solve(const GshsModel& model, const GridSpec& g, double dt, double horizon) {
  const SplittingPropagator prop(model, g, dt);
  return propagate(prop, initial_density(model, g), horizon, NoThreshold{}).final_density;
}

}  // namespace

TEST_CASE("without jumps a step is the continuous stage") {
  const GridSpec g({32}, {20.0}, {-10.0});
  const GshsModel m = test::constant_model(0.7, 0.05);
  const SplittingPropagator prop(m, g, 0.1);
  CHECK(prop.jump().generator().is_zero());
  const DensityGrid p0 = initial_density(m, g);
  const DensityGrid a = prop.step(p0, 0.0);
  const DensityGrid b = idft(prop.continuous().propagate(dft(p0), 0.0));
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("without motion a step is the jump stage") {
  const GridSpec g({8}, {1.0}, {0.0}, 2);
  const GshsModel m = test::two_state_switch(1.3);
  const SplittingPropagator prop(m, g, 0.2);
  CHECK(prop.continuous().method(0) == ContinuousMethod::kIdentity);
  RandomSource rng(5);
  const DensityGrid p = test::random_density(g, rng);
  const DensityGrid a = prop.step(p, 0.0);
  const DensityGrid b = prop.jump().propagate(p);
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Lie splitting converges at first order") {
  const GshsModel m = test::smooth_two_mode_model();
  const GridSpec g({32}, {2.0 * kPi}, {0.0}, 2);
  const double horizon = 0.8;
  std::vector<DensityGrid> solutions;
  for (double dt = 0.1; dt > 0.006; dt /= 2.0) solutions.push_back(solve(m, g, dt, horizon));
  REQUIRE(solutions.size() == 5);
  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < solutions.size(); ++i) diffs.push_back(l1_distance(solutions[i], solutions[i + 1]));
  for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
    const double ratio = diffs[i] / diffs[i + 1];
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
  }
}

TEST_CASE("propagate bookkeeping") {
  const GshsModel m = test::smooth_two_mode_model();
  const GridSpec g({16}, {2.0 * kPi}, {0.0}, 2);
  const SplittingPropagator prop(m, g, 0.05);
  const DensityGrid p0 = initial_density(m, g);

  SUBCASE("zero horizon") {
    const auto r = propagate(prop, p0, 0.0, AbsoluteThreshold{});
    REQUIRE(r.snapshots.size() == 1);
    CHECK(r.snapshots[0].time == 0.0);
    CHECK(r.snapshots[0].density.values() == p0.values());
    CHECK(r.step_seconds.empty());
  }
  SUBCASE("requested output times only") {
    const auto r = propagate(prop, p0, 0.5, AbsoluteThreshold{1e-3}, {0.0, 0.25, 0.5});
    REQUIRE(r.snapshots.size() == 3);
    CHECK(r.snapshots[1].time == doctest::Approx(0.25));
    CHECK(r.step_seconds.size() == 10);
    CHECK(r.final_density.values() == r.snapshots[2].density.values());
  }
  SUBCASE("every step when no times are given, unit mass throughout") {
    const auto r = propagate(prop, p0, 0.5, AbsoluteThreshold{1e-3});
    CHECK(r.snapshots.size() == 11);
    for (const auto& s : r.snapshots) {
      CHECK(mass(s.density) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(s.density.values().minCoeff() >= 0.0);
    }
  }
  SUBCASE("deterministic") {
    const auto a = propagate(prop, p0, 0.5, AbsoluteThreshold{});
    const auto b = propagate(prop, p0, 0.5, AbsoluteThreshold{});
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
      CHECK(a.snapshots[i].density.values() == b.snapshots[i].density.values());
    }
  }
  SUBCASE("invalid horizons and times") {
    CHECK_THROWS_AS(propagate(prop, p0, 0.52, NoThreshold{}), std::invalid_argument);
    CHECK_THROWS_AS(propagate(prop, p0, 0.5, NoThreshold{}, {0.6}), std::invalid_argument);
    CHECK_THROWS_AS(propagate(prop, p0, 0.5, NoThreshold{}, {0.11}), std::invalid_argument);
    CHECK_THROWS_AS(step_count(1.0, 0.0), std::invalid_argument);
    CHECK(step_count(6.0, 0.025) == 240);
  }
}

TEST_CASE("bouncing ball steps keep unit mass") {
  const auto model = bouncing_ball_model();
  const GridSpec g = bouncing_ball_grid(40, 40);
  const SplittingPropagator prop(model, g, 0.025);
  const auto r = propagate(prop, initial_density(model, g), 1.0, AbsoluteThreshold{}, {1.0});
  CHECK(mass(r.final_density) == doctest::Approx(1.0).epsilon(1e-12));
  // The first bounce sends mass to positive velocities.
  double upward = 0.0;
  for (Index j = 0; j < g.num_points(); ++j) {
    if (g.point(j)[1] > 0.5) upward += r.final_density(0, j) * g.cell_volume();
  }
  CHECK(upward > 0.2);
}
