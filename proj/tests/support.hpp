#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gshs/grid.hpp"
#include "gshs/model.hpp"
#include "gshs/rng.hpp"

namespace gshs::test {

constexpr double kPi = std::numbers::pi;

inline double gaussian(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * kPi * var);
}

inline State vec(std::initializer_list<double> v) {
  State r(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

/// Direct summation of the forward transform for one mode.
inline Eigen::VectorXcd naive_dft(const GridSpec& g, const Eigen::VectorXd& values) {
  const Index n = g.num_points();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (Index q = 0; q < n; ++q) {
    for (Index j = 0; j < n; ++j) {
      double phase = 0.0;
      for (int k = 0; k < g.num_axes(); ++k) {
        phase += static_cast<double>(g.frequency(k, g.axis_index(q, k))) * g.axis_index(j, k) / g.count(k);
      }
      out[q] += values[j] * std::polar(1.0, -2.0 * kPi * phase);
    }
  }
  return out / static_cast<double>(n);
}

/// Constant-coefficient one-mode model on one axis, no jumps.
inline GshsModel constant_model(double a0, double d0) {
  GshsModel m;
  m.name = "constant";
  m.num_axes = 1;
  m.num_noises = 1;
  m.mode_count = 1;
  m.angular_axes = {false};
  m.drift = [a0](double, const State&, int) { return vec({a0}); };
  m.diffusion = [d0](double, const State&, int) {
    StateMatrix b(1, 1);
    b(0, 0) = std::sqrt(2.0 * d0);
    return b;
  };
  m.rate = [](const State&, int) { return 0.0; };
  m.kernel = SwitchingKernel{[](const State&, int from, int to) { return from == to ? 1.0 : 0.0; }};
  m.initial.pdf = [](const State& r, int) { return gaussian(r[0], 0.0, 0.25); };
  m.initial.sample = [](RandomSource& rng) { return HybridState{vec({rng.normal(0.0, 0.5)}), 0}; };
  return m;
}

/// Two modes on a periodic axis of length 2 pi with smooth drift/diffusion
/// and smooth, state-dependent swap rates.
inline GshsModel smooth_two_mode_model() {
  GshsModel m;
  m.name = "smooth-two-mode";
  m.num_axes = 1;
  m.num_noises = 1;
  m.mode_count = 2;
  m.angular_axes = {false};
  m.drift = [](double, const State& r, int s) { return vec({s == 0 ? 1.0 + 0.5 * std::sin(r[0]) : -0.8}); };
  m.diffusion = [](double, const State& r, int s) {
    StateMatrix b(1, 1);
    b(0, 0) = s == 0 ? 0.4 : 0.3 * (1.2 + std::cos(r[0]));
    return b;
  };
  m.rate = [](const State& r, int s) { return s == 0 ? 1.5 + std::cos(r[0]) : 1.0 + 0.5 * std::sin(r[0]); };
  m.kernel = SwitchingKernel{[](const State&, int from, int to) { return from != to ? 1.0 : 0.0; }};
  m.initial.pdf = [](const State& r, int s) { return s == 0 ? std::exp(2.0 * std::cos(r[0] - kPi)) : 0.0; };
  return m;
}

/// Constant-rate two-state switch, continuous state frozen.
inline GshsModel two_state_switch(double rate) {
  GshsModel m;
  m.name = "switch";
  m.num_axes = 1;
  m.num_noises = 1;
  m.mode_count = 2;
  m.angular_axes = {false};
  m.drift = [](double, const State&, int) { return vec({0.0}); };
  m.diffusion = [](double, const State&, int) { return StateMatrix::Zero(1, 1); };
  m.rate = [rate](const State&, int) { return rate; };
  m.kernel = SwitchingKernel{[](const State&, int from, int to) { return from != to ? 1.0 : 0.0; }};
  m.initial.pdf = [](const State&, int s) { return s == 0 ? 1.0 : 0.0; };
  m.initial.sample = [](RandomSource&) { return HybridState{vec({0.5}), 0}; };
  return m;
}

/// dx = -alpha x dt + beta dW, z = x + N(0, r^2), x0 ~ N(m0, p0).
struct LinearGaussian {
  double alpha = 0.5, beta = 0.5, r = 0.4, m0 = 1.0, p0 = 0.09;

  GshsModel model() const {
    GshsModel m;
    m.name = "linear-gaussian";
    m.num_axes = 1;
    m.num_noises = 1;
    m.mode_count = 1;
    m.angular_axes = {false};
    m.drift = [a = alpha](double, const State& x, int) { return vec({-a * x[0]}); };
    m.diffusion = [b = beta](double, const State&, int) {
      StateMatrix d(1, 1);
      d(0, 0) = b;
      return d;
    };
    m.rate = [](const State&, int) { return 0.0; };
    m.kernel = SwitchingKernel{[](const State&, int from, int to) { return from == to ? 1.0 : 0.0; }};
    m.initial.pdf = [*this](const State& x, int) { return gaussian(x[0], m0, p0); };
    m.initial.sample = [*this](RandomSource& rng) { return HybridState{vec({rng.normal(m0, std::sqrt(p0))}), 0}; };
    m.measurement_dim = 1;
    m.likelihood = [s = r](const Eigen::VectorXd& z, const State& x, int) { return gaussian(z[0], x[0], s * s); };
    m.measure = [s = r](const HybridState& x, RandomSource& rng) {
      Eigen::VectorXd z(1);
      z[0] = rng.normal(x.r[0], s);
      return z;
    };
    return m;
  }

  /// Kalman filter for the Euler-discretized system; returns posterior
  /// (mean, variance) after each measurement.
  std::vector<std::pair<double, double>> kalman(const std::vector<double>& zs, double dt) const {
    const double F = 1.0 - alpha * dt, Q = beta * beta * dt;
    double m = m0, p = p0;
    std::vector<std::pair<double, double>> out;
    for (double z : zs) {
      m = F * m;
      p = F * F * p + Q;
      const double k = p / (p + r * r);
      m += k * (z - m);
      p *= 1.0 - k;
      out.emplace_back(m, p);
    }
    return out;
  }
};

inline DensityGrid random_density(const GridSpec& g, RandomSource& rng) {
  DensityGrid d(g);
  for (Index i = 0; i < d.values().size(); ++i) d.values()[i] = rng.uniform();
  normalize(d);
  return d;
}

}  // namespace gshs::test
