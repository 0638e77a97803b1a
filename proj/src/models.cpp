#include "gshs/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gshs {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double normal_pdf(double x, double mean, double sigma) {
  const double u = (x - mean) / sigma;
  return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * kPi) * sigma);
}

State make_state(std::initializer_list<double> values) {
  State r(static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) r[i++] = v;
  return r;
}

}  // namespace

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w >= kTwoPi ? 0.0 : w;
}

double wrap_to_pi(double theta) {
  double w = wrap_angle(theta + kPi) - kPi;
  return w >= kPi ? -kPi : w;
}

double scaled_bessel_i0(double x) {
  x = std::abs(x);
  if (x < 500.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  // Hankel asymptotic expansion; the omitted terms are below 1e-16 here.
  const double t = 1.0 / (8.0 * x);
  const double series = 1.0 + t * (1.0 + t * (9.0 / 2.0 + t * (225.0 / 6.0 + t * (11025.0 / 24.0))));
  return series / std::sqrt(kTwoPi * x);
}

double log_bessel_i0(double x) { return std::log(scaled_bessel_i0(x)) + std::abs(x); }

double von_mises_pdf(double theta, double mu, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("von_mises_pdf: kappa must be nonnegative");
  return std::exp(kappa * (std::cos(theta - mu) - 1.0)) / (kTwoPi * scaled_bessel_i0(kappa));
}

double sample_von_mises(RandomSource& rng, double mu, double kappa) {
  if (kappa < 1e-8) return kTwoPi * rng.uniform();
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double z = std::cos(kPi * rng.uniform());
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = rng.uniform();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double angle = std::acos(std::clamp(f, -1.0, 1.0));
      return wrap_angle(rng.uniform() < 0.5 ? mu - angle : mu + angle);
    }
  }
}

GshsModel bouncing_ball_model(const BouncingBallParams& p) {
  if (!(p.g > 0 && p.drag >= 0 && p.sigma_v >= 0 && p.sigma_c > 0 && p.sigma_m > 0) ||
      !(p.restitution > 0 && p.restitution <= 1)) {
    throw std::invalid_argument("bouncing ball: invalid parameters");
  }
  GshsModel m;
  m.name = "bouncing-ball";
  m.num_axes = 2;
  m.num_noises = 1;
  m.mode_count = 1;
  m.angular_axes = {false, false};
  m.drift = [p](double, const State& r, int) { return make_state({r[1], -p.g - p.drag * r[1] * std::abs(r[1])}); };
  m.diffusion = [p](double, const State& r, int) {
    StateMatrix b(2, 1);
    b << 0.0, p.sigma_v * r[1] * r[1];
    return b;
  };
  m.rate = [](const State& r, int) {
    if (r[1] >= 0.0) return 0.0;
    if (r[0] < 0.0) return 100.0;
    return r[0] == 0.0 ? 30.0 : 0.0;
  };
  GridDeltaKernel kernel;
  kernel.delta_axes = {0};
  kernel.reset = [](const State& r, int s) { return HybridState{make_state({std::abs(r[0]), r[1]}), s}; };
  kernel.residual_density = [p](const State& from, int, const State& to) {
    return normal_pdf(to[1], -p.restitution * from[1], p.sigma_c);
  };
  kernel.sample = [p](const HybridState& x, RandomSource& rng) {
    return HybridState{make_state({std::abs(x.r[0]), rng.normal(-p.restitution * x.r[1], p.sigma_c)}), x.s};
  };
  m.kernel = std::move(kernel);
  m.initial.pdf = [](const State& r, int) { return normal_pdf(r[0], 1.5, 0.2) * normal_pdf(r[1], 0.0, 0.5); };
  m.initial.sample = [](RandomSource& rng) {
    const double y = rng.normal(1.5, 0.2);
    return HybridState{make_state({y, rng.normal(0.0, 0.5)}), 0};
  };
  m.measurement_dim = 1;
  m.likelihood = [p](const Measurement& z, const State& r, int) { return normal_pdf(z[0], r[0], p.sigma_m); };
  m.measure = [p](const HybridState& x, RandomSource& rng) {
    Measurement z(1);
    z[0] = rng.normal(x.r[0], p.sigma_m);
    return z;
  };
  return m;
}

GridSpec bouncing_ball_grid(int height_points, int velocity_points) {
  return GridSpec({height_points, velocity_points}, {5.0, 16.0}, {-2.5, -8.0}, 1);
}

Distribution bouncing_ball_estimation_prior() {
  Distribution d;
  d.pdf = [](const State& r, int) { return r[0] >= 0.0 && r[0] <= 2.5 && std::abs(r[1]) <= 8.0 ? 1.0 / 40.0 : 0.0; };
  d.sample = [](RandomSource& rng) {
    const double y = 2.5 * rng.uniform();
    return HybridState{make_state({y, -8.0 + 16.0 * rng.uniform()}), 0};
  };
  return d;
}

std::pair<double, int> nearest_obstacle(const DubinsParams& params, double y1, double y2) {
  double best = std::numeric_limits<double>::infinity();
  int index = -1;
  for (std::size_t i = 0; i < params.obstacles.size(); ++i) {
    const double d = std::hypot(y1 - params.obstacles[i][0], y2 - params.obstacles[i][1]);
    if (d < best) {
      best = d;
      index = static_cast<int>(i);
    }
  }
  return {best, index};
}

namespace {
// Width of the sine ramp between the zero and full rates.
constexpr double kRamp = 0.4;
constexpr double kFullRate = 50.0;
}  // namespace

double dubins_rate_in(const DubinsParams& params, double y1, double y2) {
  const double d = nearest_obstacle(params, y1, y2).first;
  if (d < params.turn_distance - kRamp) return kFullRate;
  if (d < params.turn_distance) return kFullRate * std::sin((params.turn_distance - d) / kRamp * kPi / 2.0);
  return 0.0;
}

double dubins_rate_out(const DubinsParams& params, double y1, double y2) {
  const double d = nearest_obstacle(params, y1, y2).first;
  if (d > params.turn_distance + kRamp) return kFullRate;
  if (d > params.turn_distance) return kFullRate * std::sin((d - params.turn_distance) / kRamp * kPi / 2.0);
  return 0.0;
}

GshsModel dubins_model(const DubinsParams& p) {
  if (!(p.speed > 0 && p.turn_rate > 0 && p.sigma_u >= 0 && p.turn_distance > 0 && p.sigma_l > 0 && p.kappa_l > 0)) {
    throw std::invalid_argument("dubins: invalid parameters");
  }
  GshsModel m;
  m.name = "dubins";
  m.num_axes = 3;
  m.num_noises = 1;
  m.mode_count = 3;
  m.angular_axes = {false, false, true};
  m.drift = [p](double, const State& r, int s) {
    const double u = s == dubins_mode::kLeft ? p.turn_rate : s == dubins_mode::kRight ? -p.turn_rate : 0.0;
    return make_state({p.speed * std::cos(r[2]), p.speed * std::sin(r[2]), u});
  };
  m.diffusion = [p](double, const State&, int) {
    StateMatrix b(3, 1);
    b << 0.0, 0.0, p.sigma_u;
    return b;
  };
  m.rate = [p](const State& r, int s) {
    return s == dubins_mode::kForward ? dubins_rate_in(p, r[0], r[1]) : dubins_rate_out(p, r[0], r[1]);
  };
  auto target = [p](const State& r, int s_from) {
    const auto [dist, i] = nearest_obstacle(p, r[0], r[1]);
    const bool inside = dist < p.turn_distance;
    if (s_from != dubins_mode::kForward) return inside ? s_from : dubins_mode::kForward;
    if (!inside) return s_from;
    const auto& o = p.obstacles[static_cast<std::size_t>(i)];
    const double bearing = std::atan2(o[1] - r[1], o[0] - r[0]);
    return wrap_to_pi(bearing - r[2]) < 0.0 ? dubins_mode::kLeft : dubins_mode::kRight;
  };
  m.kernel = SwitchingKernel{[target](const State& r, int s_from, int s_to) {
    return target(r, s_from) == s_to ? 1.0 : 0.0;
  }};
  m.initial.pdf = [](const State& r, int s) {
    if (s != dubins_mode::kForward) return 0.0;
    return normal_pdf(r[0], 0.0, 0.2) * normal_pdf(r[1], -2.0, 0.2) * von_mises_pdf(r[2], kPi / 2.0, 20.0);
  };
  m.initial.sample = [](RandomSource& rng) {
    const double y1 = rng.normal(0.0, 0.2);
    const double y2 = rng.normal(-2.0, 0.2);
    return HybridState{make_state({y1, y2, sample_von_mises(rng, kPi / 2.0, 20.0)}), dubins_mode::kForward};
  };
  m.measurement_dim = 2;
  const double log_norm = -1.5 * std::log(kTwoPi) - std::log(p.sigma_l) - log_bessel_i0(p.kappa_l);
  m.likelihood = [p, log_norm](const Measurement& z, const State& r, int) {
    const double dy1 = r[0] - p.lidar[0], dy2 = r[1] - p.lidar[1];
    const double range = std::hypot(dy1, dy2);
    const double bearing = std::atan2(dy2, dy1);
    const double u = (z[0] - range) / p.sigma_l;
    return std::exp(log_norm - 0.5 * u * u + p.kappa_l * std::cos(z[1] - bearing));
  };
  m.measure = [p](const HybridState& x, RandomSource& rng) {
    const double dy1 = x.r[0] - p.lidar[0], dy2 = x.r[1] - p.lidar[1];
    Measurement z(2);
    z[0] = std::hypot(dy1, dy2) + rng.normal(0.0, p.sigma_l);
    z[1] = wrap_to_pi(std::atan2(dy2, dy1) + sample_von_mises(rng, 0.0, p.kappa_l));
    return z;
  };
  return m;
}

GridSpec dubins_grid(int n1, int n2, int n_theta) {
  return GridSpec({n1, n2, n_theta}, {6.0, 6.0, kTwoPi}, {-3.0, -3.0, 0.0}, 3);
}

Distribution dubins_estimation_prior() {
  Distribution d;
  const double density = 1.0 / (36.0 * kTwoPi * 3.0);
  d.pdf = [density](const State&, int) { return density; };
  d.sample = [](RandomSource& rng) {
    const double y1 = -3.0 + 6.0 * rng.uniform();
    const double y2 = -3.0 + 6.0 * rng.uniform();
    const double theta = kTwoPi * rng.uniform();
    return HybridState{make_state({y1, y2, theta}), static_cast<int>(3.0 * rng.uniform()) % 3};
  };
  return d;
}

}  // namespace gshs
