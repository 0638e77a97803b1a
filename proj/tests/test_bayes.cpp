#include <doctest.h>

#include "gshs/bayes.hpp"
#include "gshs/errors.hpp"
#include "gshs/models.hpp"
#include "support.hpp"

using namespace gshs;
using test::kPi;
using test::vec;

namespace {

GshsModel scaled_likelihood(GshsModel m, double factor) {
  auto base = m.likelihood;
  m.likelihood = [base, factor](const Measurement& z, const State& r, int s) { return factor * base(z, r, s); };
  return m;
}

}  // namespace

TEST_CASE("uniform prior gives the normalized likelihood") {
  const auto model = bouncing_ball_model();
  const GridSpec g = bouncing_ball_grid(50, 20);
  const DensityGrid prior(g, Eigen::VectorXd::Constant(g.size(), 1.0 / 80.0));
  const Measurement z = Measurement::Constant(1, 0.8);
  const DensityGrid post = correct(prior, z, model, NoThreshold{});
  DensityGrid oracle = sample_on_grid(g, [&](const State& r, int s) { return model.likelihood(z, r, s); });
  normalize(oracle);
  CHECK((post.values() - oracle.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-cell prior is unchanged") {
  const auto model = bouncing_ball_model();
  const GridSpec g = bouncing_ball_grid(10, 10);
  DensityGrid prior(g);
  prior(0, 57) = 1.0 / g.cell_volume();
  const DensityGrid post = correct(prior, Measurement::Constant(1, 2.0), model);
  CHECK(post.values() == prior.values());
}

TEST_CASE("conjugate Gaussian posterior mean") {
  const auto model = bouncing_ball_model();
  const GridSpec g = bouncing_ball_grid(100, 100);
  const DensityGrid prior = initial_density(model, g);
  const DensityGrid post = correct(prior, Measurement::Constant(1, 1.4), model, NoThreshold{});
  const double expected = (0.04 * 1.4 + 0.09 * 1.5) / (0.04 + 0.09);
  const auto est = point_estimates(post, model.angular_axes);
  CHECK(std::abs(est.mean[0] - expected) < g.spacing(0));
  CHECK(std::abs(est.mean[0] - expected) < 1e-6);
  CHECK(std::abs(est.map_state.r[0] - expected) <= g.spacing(0));
  const double var = 0.04 * 0.09 / 0.13;
  CHECK(est.stddev[0] == doctest::Approx(std::sqrt(var)).epsilon(1e-3));
}

TEST_CASE("posterior is invariant under likelihood rescaling") {
  const auto model = dubins_model();
  const GridSpec g = dubins_grid(16, 16, 8);
  RandomSource rng(9);
  const DensityGrid prior = test::random_density(g, rng);
  Measurement z(2);
  z << 2.0, 1.4;
  const DensityGrid base = correct(prior, z, model);
  // Power-of-two factors are exact in floating point.
  CHECK(correct(prior, z, scaled_likelihood(model, 8.0)).values() == base.values());
  const DensityGrid other = correct(prior, z, scaled_likelihood(model, 7.3));
  CHECK((other.values() - base.values()).cwiseAbs().maxCoeff() <= 1e-14 * base.values().maxCoeff());
  CHECK(((other.values().array() == 0.0) == (base.values().array() == 0.0)).all());
}

TEST_CASE("constant likelihood is identity up to thresholding") {
  GshsModel model = bouncing_ball_model();
  model.likelihood = [](const Measurement&, const State&, int) { return 0.37; };
  RandomSource rng(4);
  const GridSpec g = bouncing_ball_grid(12, 12);
  const DensityGrid prior = test::random_density(g, rng);
  const DensityGrid post = correct(prior, Measurement::Zero(1), model);
  CHECK((post.values() - threshold_renormalize(prior, kEstimationThreshold).values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("correct errors") {
  const auto model = bouncing_ball_model();
  const GridSpec g = bouncing_ball_grid(10, 10);
  const DensityGrid prior(g, Eigen::VectorXd::Constant(g.size(), 1.0 / 80.0));
  CHECK_THROWS_AS(correct(prior, Measurement::Zero(2), model), std::invalid_argument);
  GshsModel deaf = model;
  deaf.likelihood = [](const Measurement&, const State&, int) { return 0.0; };
  CHECK_THROWS_AS(correct(prior, Measurement::Zero(1), deaf), NumericalError);
}

TEST_CASE("point estimates") {
  SUBCASE("symmetric density has zero mean") {
    const GridSpec g({20}, {2.0}, {-1.0});
    const DensityGrid d = sample_on_grid(g, [](const State& r, int) { return std::exp(-r[0] * r[0]); });
    // Grid points are symmetric about 0 except for the -1 end point.
    DensityGrid sym = d;
    sym(0, 0) = 0.0;
    normalize(sym);
    CHECK(std::abs(point_estimates(sym, {false}).mean[0]) < 1e-14);
  }
  SUBCASE("mode marginal and MAP mode") {
    const GridSpec g({4}, {1.0}, {0.0}, 3);
    DensityGrid d(g);
    d(1, 2) = 4.0;
    d(1, 3) = 1.0;
    const auto est = point_estimates(d, {false});
    CHECK(est.mode_marginal[0] == 0.0);
    CHECK(est.mode_marginal[1] == doctest::Approx(1.0));
    CHECK(est.map_state.s == 1);
    CHECK(est.map_state.r[0] == doctest::Approx(0.5));
    CHECK(est.mode_estimate() == 1);
    CHECK(std::isnan(est.mean_direction[0]));
  }
  SUBCASE("ties go to the lowest linear index") {
    const GridSpec g({4}, {1.0}, {0.0}, 2);
    DensityGrid d(g);
    d(0, 3) = 2.0;
    d(1, 1) = 2.0;
    CHECK(point_estimates(d, {false}).map_state.s == 0);
    CHECK(point_estimates(d, {false}).map_state.r[0] == doctest::Approx(0.75));
  }
  SUBCASE("von Mises mean direction and circular deviation") {
    const GridSpec g({64}, {2.0 * kPi}, {0.0});
    DensityGrid d = sample_on_grid(g, [](const State& r, int) { return von_mises_pdf(r[0], kPi / 2.0, 20.0); });
    normalize(d);
    const auto est = point_estimates(d, {true});
    CHECK(std::abs(est.mean_direction[0] - kPi / 2.0) <= g.spacing(0));
    const double ratio = std::cyl_bessel_i(1.0, 20.0) / std::cyl_bessel_i(0.0, 20.0);
    CHECK(est.stddev[0] == doctest::Approx(std::sqrt(-2.0 * std::log(ratio))).epsilon(0.02));
    CHECK(est.direction_defined);
  }
  SUBCASE("wrapped mass around zero") {
    const GridSpec g({16}, {2.0 * kPi}, {0.0});
    DensityGrid d(g);
    d(0, 1) = 1.0;
    d(0, 15) = 1.0;
    normalize(d);
    const double m = point_estimates(d, {true}).mean_direction[0];
    CHECK(std::min(m, 2.0 * kPi - m) < 1e-12);
  }
  SUBCASE("undefined direction") {
    const GridSpec g({8}, {2.0 * kPi}, {0.0});
    const DensityGrid d(g, Eigen::VectorXd::Constant(8, 1.0 / (2.0 * kPi)));
    CHECK_THROWS_AS(point_estimates(d, {true}), NumericalError);
    const auto lax = point_estimates(d, {true}, false);
    CHECK_FALSE(lax.direction_defined);
    CHECK(std::isinf(lax.stddev[0]));
  }
}

TEST_CASE("MAP is invariant under increasing transforms") {
  RandomSource rng(21);
  const GridSpec g({8, 8}, {1.0, 1.0}, {0.0, 0.0}, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityGrid d = test::random_density(g, rng);
    DensityGrid t(g, (d.values().array().sqrt() * 3.0 + 0.1).exp().matrix());
    normalize(t);
    const auto a = point_estimates(d, {false, false}), b = point_estimates(t, {false, false});
    CHECK(a.map_state.s == b.map_state.s);
    CHECK(a.map_state.r == b.map_state.r);
  }
}

TEST_CASE("filter without measurements equals propagation") {
  const auto model = bouncing_ball_model();
  const GridSpec g = bouncing_ball_grid(30, 30);
  const SplittingPropagator prop(model, g, 0.05);
  const DensityGrid p0 = initial_density(model, g);
  const auto filtered = run_filter(prop, model, p0, {}, 0.5);
  const auto plain = propagate(prop, p0, 0.5, AbsoluteThreshold{});
  CHECK(filtered.final_density.values() == plain.final_density.values());
  CHECK(filtered.steps.size() == 11);
  for (const auto& s : filtered.steps) CHECK_FALSE(s.corrected);
}

TEST_CASE("filter corrects on measurement steps") {
  const auto model = bouncing_ball_model();
  const GridSpec g = bouncing_ball_grid(40, 40);
  const SplittingPropagator prop(model, g, 0.05);
  const DensityGrid p0 = density_from(bouncing_ball_estimation_prior(), g);
  std::vector<TimedMeasurement> zs = {{0.0, Measurement::Constant(1, 1.5)}, {0.1, Measurement::Constant(1, 1.4)}};
  FilterOptions opt;
  opt.snapshot_times = {0.1};
  const auto r = run_filter(prop, model, p0, zs, 0.2, opt);
  REQUIRE(r.steps.size() == 5);
  CHECK(r.steps[0].corrected);
  CHECK_FALSE(r.steps[1].corrected);
  CHECK(r.steps[2].corrected);
  CHECK((*r.steps[2].z)[0] == 1.4);
  REQUIRE(r.snapshots.size() == 1);
  CHECK(r.snapshots[0].time == doctest::Approx(0.1));
  CHECK(r.step_seconds.size() == 4);

  // Step 0 is exactly the corrected prior.
  const DensityGrid first = correct(p0, zs[0].z, model);
  CHECK(r.steps[0].estimate.mean[0] == doctest::Approx(point_estimates(first, {false, false}).mean[0]));

  CHECK_THROWS_AS(run_filter(prop, model, p0, {{0.07, Measurement::Constant(1, 1.0)}}, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(run_filter(prop, model, p0, {zs[1], zs[1]}, 0.2), std::invalid_argument);
}
