#include "gshs/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>

#include "gshs/errors.hpp"
#include "gshs/models.hpp"

namespace gshs {

namespace {

void wrap_angular(const GshsModel& model, State& r) {
  for (std::size_t k = 0; k < model.angular_axes.size(); ++k) {
    if (model.angular_axes[k]) r[static_cast<Index>(k)] = wrap_angle(r[static_cast<Index>(k)]);
  }
}

}  // namespace

bool advance(const GshsModel& model, HybridState& x, double t, double dt, RandomSource& rng, int motion_substeps) {
  if (motion_substeps < 1) throw std::invalid_argument("advance: motion_substeps must be at least 1");
  const double h = dt / motion_substeps;
  const double sqrt_h = std::sqrt(h);
  for (int q = 0; q < motion_substeps; ++q) {
    const double tq = t + q * h;
    const State a = model.drift(tq, x.r, x.s);
    const StateMatrix b = model.diffusion(tq, x.r, x.s);
    for (Index w = 0; w < b.cols(); ++w) {
      const double xi = rng.normal() * sqrt_h;
      if (!b.col(w).isZero(0.0)) x.r += b.col(w) * xi;
    }
    x.r += a * h;
    wrap_angular(model, x.r);
    if (!x.r.allFinite()) throw NumericalError("sample path left the finite range");
  }

  const double lambda = model.rate(x.r, x.s);
  if (lambda <= 0.0) return false;
  if (!(rng.uniform() < -std::expm1(-lambda * dt))) return false;
  x = sample_kernel(model, x, rng);
  wrap_angular(model, x.r);
  if (!x.r.allFinite()) throw NumericalError("jump reset produced a non-finite state");
  return true;
}

Execution sample_path(const GshsModel& model, const HybridState& x0, double t_end, double dt, RandomSource& rng,
                      int motion_substeps) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_path: dt must be positive");
  Execution path;
  HybridState x = x0;
  path.times.push_back(0.0);
  path.states.push_back(x);
  const auto steps = static_cast<long>(std::llround(t_end / dt));
  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const bool jumped = advance(model, x, t, dt, rng, motion_substeps);
    path.times.push_back((k + 1) * dt);
    path.states.push_back(x);
    if (jumped) path.jump_times.push_back((k + 1) * dt);
  }
  return path;
}

Execution sample_path(const GshsModel& model, double t_end, double dt, std::uint64_t seed, int motion_substeps) {
  RandomSource rng(seed);
  const HybridState x0 = model.initial.sample(rng);
  return sample_path(model, x0, t_end, dt, rng, motion_substeps);
}

MonteCarloEnsemble::MonteCarloEnsemble(const GshsModel& model, const Distribution& initial, Index count,
                                       std::uint64_t seed)
    : model_(&model) {
  states_.reserve(static_cast<std::size_t>(count));
  streams_.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    streams_.push_back(stream_for(seed, static_cast<std::uint64_t>(i)));
    states_.push_back(initial.sample(streams_.back()));
  }
}

void MonteCarloEnsemble::step(double dt, int motion_substeps) {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    advance(*model_, states_[i], time_, dt, streams_[i], motion_substeps);
  }
  time_ += dt;
}

Histogram histogram_density(const std::vector<HybridState>& samples, const GridSpec& grid,
                            const std::vector<bool>& angular_axes, const std::vector<double>& weights) {
  if (!weights.empty() && weights.size() != samples.size()) {
    throw std::invalid_argument("histogram_density: weight count does not match sample count");
  }
  Histogram h{DensityGrid(grid), 0.0};
  double total = 0.0, dropped = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    total += w;
    const HybridState& x = samples[i];
    bool inside = x.s >= 0 && x.s < grid.mode_count();
    Index linear = 0;
    for (int k = 0; inside && k < grid.num_axes(); ++k) {
      const bool angular = static_cast<std::size_t>(k) < angular_axes.size() && angular_axes[static_cast<std::size_t>(k)];
      double u = (x.r[k] - grid.offset(k)) / grid.spacing(k) + 0.5;
      if (angular) {
        u = std::fmod(u, static_cast<double>(grid.count(k)));
        if (u < 0.0) u += grid.count(k);
      }
      const double cell = std::floor(u);
      if (!(cell >= 0.0 && cell < grid.count(k))) {
        inside = false;
        break;
      }
      linear += static_cast<Index>(cell) * grid.stride(k);
    }
    if (inside) {
      h.density(x.s, linear) += w;
    } else {
      dropped += w;
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("histogram_density: no samples");
  h.density.values() /= total * grid.cell_volume();
  h.drop_fraction = dropped / total;
  return h;
}

}  // namespace gshs
