#pragma once

#include <array>
#include <vector>

#include "gshs/grid.hpp"
#include "gshs/model.hpp"
#include "gshs/rng.hpp"

namespace gshs {

// Circular utilities --------------------------------------------------------

/// Wraps an angle into [0, 2 pi).
double wrap_angle(double theta);
/// Wraps an angle into [-pi, pi).
double wrap_to_pi(double theta);

/// e^{-x} I0(x), finite for any x >= 0.
double scaled_bessel_i0(double x);
/// log I0(x).
double log_bessel_i0(double x);

double von_mises_pdf(double theta, double mu, double kappa);
/// Best-Fisher rejection sampler; result in [0, 2 pi).
double sample_von_mises(RandomSource& rng, double mu, double kappa);

// Bouncing ball --------------------------------------------------------------

struct BouncingBallParams {
  double g = 9.8;
  double drag = 0.05;     // nu, 1/m
  double sigma_v = 0.01;  // sqrt(s)/m
  double restitution = 0.95;
  double sigma_c = 0.5;  // m/s
  double sigma_m = 0.3;  // m
};

/// State (y, ydot), one mode. Rate 100 below ground moving down, 30 exactly
/// on the ground moving down; reset y+ = |y-|, ydot+ ~ N(-c ydot-, sigma_c^2).
/// Measures the height with Gaussian noise.
GshsModel bouncing_ball_model(const BouncingBallParams& params = {});

/// [-2.5, 2.5) x [-8, 8).
GridSpec bouncing_ball_grid(int height_points = 100, int velocity_points = 100);

/// Uniform on [0, 2.5] x [-8, 8].
Distribution bouncing_ball_estimation_prior();

// Dubins vehicle -------------------------------------------------------------

namespace dubins_mode {
inline constexpr int kForward = 0;
inline constexpr int kLeft = 1;
inline constexpr int kRight = 2;
}  // namespace dubins_mode

struct DubinsParams {
  double speed = 1.0;      // v, m/s
  double turn_rate = 2.0;  // a, rad/s
  double sigma_u = 0.2;    // rad/sqrt(s)
  std::vector<std::array<double, 2>> obstacles = {{0.0, 0.0}, {1.0, -1.5}, {1.0, 1.5}};
  double turn_distance = 0.5;  // d, m
  double sigma_l = 0.5;        // m
  double kappa_l = 30.0;
  std::array<double, 2> lidar = {0.0, -3.0};
};

/// Distance to and index of the nearest obstacle.
std::pair<double, int> nearest_obstacle(const DubinsParams& params, double y1, double y2);
double dubins_rate_in(const DubinsParams& params, double y1, double y2);
double dubins_rate_out(const DubinsParams& params, double y1, double y2);

/// State (y1, y2, theta), modes forward / left / right. Switching kernel
/// driven by the nearest obstacle; Lidar range-bearing likelihood.
GshsModel dubins_model(const DubinsParams& params = {});

/// [-3, 3) x [-3, 3) x [0, 2 pi).
GridSpec dubins_grid(int n1 = 100, int n2 = 100, int n_theta = 50);

/// Uniform over the position box, heading and modes.
Distribution dubins_estimation_prior();

}  // namespace gshs
