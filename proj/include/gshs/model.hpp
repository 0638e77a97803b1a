#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gshs/grid.hpp"
#include "gshs/rng.hpp"

namespace gshs {

/// Hybrid state x = (r, s): continuous vector and discrete mode index.
struct HybridState {
  State r;
  int s = 0;
};

using Measurement = Eigen::VectorXd;

using DriftFn = std::function<State(double t, const State& r, int s)>;
/// Diffusion coefficient b(t, r, s), an N_r x N_w matrix.
using DiffusionFn = std::function<StateMatrix(double t, const State& r, int s)>;
using RateFn = std::function<double(const State& r, int s)>;
using LikelihoodFn = std::function<double(const Measurement& z, const State& r, int s)>;
using MeasureFn = std::function<Measurement(const HybridState& x, RandomSource& rng)>;
using KernelSampler = std::function<HybridState(const HybridState& from, RandomSource& rng)>;

/// Reset kernel given as a pointwise density kappa(r-, s-, r+, s+).
struct GeneralKernel {
  std::function<double(const State& r_from, int s_from, const State& r_to, int s_to)> density;
  KernelSampler sample;
};

/// Kernel delta(r+ - r-) * kappa~(r, s-, s+): only the mode jumps.
struct SwitchingKernel {
  std::function<double(const State& r, int s_from, int s_to)> mode_probability;
};

/**
 * Kernel with a deterministic reset of the coordinates on delta_axes and a
 * density over the remaining coordinates, e.g. delta(y+ - |y-|) N(v+; -c v-, sigma).
 */
struct GridDeltaKernel {
  std::vector<int> delta_axes;
  /// Image of the delta coordinates and the destination mode; only entries on
  /// delta_axes of the returned r are read.
  std::function<HybridState(const State& r_from, int s_from)> reset;
  /// Density over the non-delta coordinates of r_to.
  std::function<double(const State& r_from, int s_from, const State& r_to)> residual_density;
  KernelSampler sample;
};

using ResetKernel = std::variant<GeneralKernel, SwitchingKernel, GridDeltaKernel>;

/// A distribution over hybrid states: density for the grid solvers, sampler
/// for sample-based baselines.
struct Distribution {
  std::function<double(const State& r, int s)> pdf;
  std::function<HybridState(RandomSource& rng)> sample;
};

/**
 * A general stochastic hybrid system: per-mode SDE dr = a dt + b dW,
 * state-dependent jump rate lambda(r, s), reset kernel, initial distribution,
 * and a measurement model.
 *
 * Callbacks must be pure and re-entrant.
 */
struct GshsModel {
  std::string name;
  int num_axes = 1;
  int num_noises = 1;
  int mode_count = 1;
  std::vector<bool> angular_axes;
  /// Drift and diffusion do not depend on t.
  bool time_invariant = true;

  DriftFn drift;
  DiffusionFn diffusion;
  RateFn rate;
  ResetKernel kernel;
  Distribution initial;

  int measurement_dim = 0;
  LikelihoodFn likelihood;
  MeasureFn measure;
};

/// D = 1/2 b b^T.
StateMatrix diffusion_matrix(const GshsModel& model, double t, const State& r, int s);

/// Samples a distribution's pdf on the grid and normalizes it.
DensityGrid density_from(const Distribution& dist, const GridSpec& grid);
DensityGrid initial_density(const GshsModel& model, const GridSpec& grid);

/// Draws a post-jump state from the model's kernel.
HybridState sample_kernel(const GshsModel& model, const HybridState& from, RandomSource& rng);

struct Diagnostic {
  std::string kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Diagnostic> violations;
  std::vector<Diagnostic> notes;
  bool ok() const { return violations.empty(); }
  bool has_violation(const std::string& kind) const;
};

/// Report-only consistency check of a model against a grid.
ValidationReport validate(const GshsModel& model, const GridSpec& grid);

}  // namespace gshs
