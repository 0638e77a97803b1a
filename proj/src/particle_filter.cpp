#include "gshs/particle_filter.hpp"

#include <cmath>
#include <stdexcept>

#include "gshs/errors.hpp"

namespace gshs {

ParticleEnsemble make_ensemble(const Distribution& initial, Index count, std::uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("make_ensemble: count must be positive");
  ParticleEnsemble ens;
  ens.particles.reserve(static_cast<std::size_t>(count));
  ens.streams.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    ens.streams.push_back(stream_for(seed, static_cast<std::uint64_t>(i)));
    ens.particles.push_back(initial.sample(ens.streams.back()));
  }
  ens.weights.assign(static_cast<std::size_t>(count), 1.0 / static_cast<double>(count));
  return ens;
}

std::vector<Index> systematic_resample(const std::vector<double>& weights, double u) {
  const auto n = static_cast<Index>(weights.size());
  std::vector<Index> parents(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double w : weights) total += w;
  double cumulative = weights.empty() ? 0.0 : weights[0] / total;
  Index j = 0;
  for (Index i = 0; i < n; ++i) {
    const double position = (static_cast<double>(i) + u) / static_cast<double>(n);
    while (position >= cumulative && j < n - 1) cumulative += weights[static_cast<std::size_t>(++j)] / total;
    parents[static_cast<std::size_t>(i)] = j;
  }
  return parents;
}

void pf_step(const GshsModel& model, ParticleEnsemble& ens, const std::optional<Measurement>& z, double t, double dt,
             RandomSource& resample_rng) {
  for (std::size_t i = 0; i < ens.particles.size(); ++i) advance(model, ens.particles[i], t, dt, ens.streams[i]);
  if (!z) return;
  double total = 0.0;
  for (std::size_t i = 0; i < ens.particles.size(); ++i) {
    ens.weights[i] *= model.likelihood(*z, ens.particles[i].r, ens.particles[i].s);
    total += ens.weights[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("pf_step: all particle weights vanished");
  for (double& w : ens.weights) w /= total;

  const auto parents = systematic_resample(ens.weights, resample_rng.uniform());
  std::vector<HybridState> next;
  next.reserve(ens.particles.size());
  for (Index p : parents) next.push_back(ens.particles[static_cast<std::size_t>(p)]);
  ens.particles = std::move(next);
  ens.weights.assign(ens.particles.size(), 1.0 / static_cast<double>(ens.particles.size()));
}

Histogram pf_density(const ParticleEnsemble& ens, const GridSpec& grid, const std::vector<bool>& angular_axes) {
  return histogram_density(ens.particles, grid, angular_axes, ens.weights);
}

Eigen::VectorXd pf_mean(const ParticleEnsemble& ens) {
  if (ens.particles.empty()) throw std::invalid_argument("pf_mean: empty ensemble");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(ens.particles.front().r.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ens.particles.size(); ++i) {
    mean += ens.weights[i] * ens.particles[i].r;
    total += ens.weights[i];
  }
  return mean / total;
}

}  // namespace gshs
