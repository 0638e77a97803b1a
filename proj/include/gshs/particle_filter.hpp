#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gshs/model.hpp"
#include "gshs/monte_carlo.hpp"

namespace gshs {

/// SIR particles with one random stream per slot; streams stay with their
/// slot across resampling.
struct ParticleEnsemble {
  std::vector<HybridState> particles;
  std::vector<double> weights;
  std::vector<RandomSource> streams;
  Index size() const { return static_cast<Index>(particles.size()); }
};

ParticleEnsemble make_ensemble(const Distribution& initial, Index count, std::uint64_t seed);

/**
 * Systematic resampling with one offset u in [0, 1): slot i takes the first
 * particle whose cumulative weight exceeds (i + u) / n.
 */
std::vector<Index> systematic_resample(const std::vector<double>& weights, double u);

/**
 * Propagates every particle one step from t; with a measurement, weights by
 * the likelihood, renormalizes and resamples. Throws NumericalError if every
 * weight vanishes.
 */
void pf_step(const GshsModel& model, ParticleEnsemble& ens, const std::optional<Measurement>& z, double t, double dt,
             RandomSource& resample_rng);

/// Weighted histogram of the particles.
Histogram pf_density(const ParticleEnsemble& ens, const GridSpec& grid, const std::vector<bool>& angular_axes = {});

/// Weighted mean of the continuous state.
Eigen::VectorXd pf_mean(const ParticleEnsemble& ens);

}  // namespace gshs
