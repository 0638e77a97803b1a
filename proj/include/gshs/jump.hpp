#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gshs/expm.hpp"
#include "gshs/grid.hpp"
#include "gshs/model.hpp"

namespace gshs {

enum class JumpKind { kGeneral, kSwitching, kGridDelta };

/**
 * Jump generator B acting on the stacked grid vector (mode-major, N_s * N_g).
 * GENERAL and GRID_DELTA store B as a sparse matrix whose column (n, m) holds
 * the gain kappa * lambda * Delta into every destination and the loss -lambda
 * on the diagonal. SWITCHING stores one N_s x N_s rate matrix per grid point
 * with a nonzero rate; the continuous state never moves.
 */
class JumpGenerator {
 public:
  JumpGenerator(GridSpec grid, JumpKind kind) : grid_(std::move(grid)), kind_(kind) {}

  const GridSpec& grid() const { return grid_; }
  JumpKind kind() const { return kind_; }
  bool is_zero() const;

  /// Sparse form (column = source); built on demand for SWITCHING.
  Eigen::SparseMatrix<double> matrix() const;

  // GENERAL / GRID_DELTA
  Eigen::SparseMatrix<double> sparse;

  // SWITCHING: point_matrices[i] is M(r_j)[s+, s-] for j = points[i].
  std::vector<Index> points;
  std::vector<Eigen::MatrixXd> point_matrices;

 private:
  GridSpec grid_;
  JumpKind kind_;
};

struct JumpOptions {
  /// Rescale each source's discretized kernel to unit quadrature mass.
  bool normalize_kernel = true;
  /// Largest connected block of B handled by a dense exponential.
  Index dense_threshold = 4096;
  Index dense_entry_budget = Index(1) << 23;
  bool allow_dense = true;
  ExpmvOptions expmv;
};

/// Builds B for the model's kernel tag. Throws NumericalError on non-finite
/// kernel values or rates.
JumpGenerator build_jump_generator(const GshsModel& model, const GridSpec& grid, const JumpOptions& options = {});

/**
 * Replaces a SWITCHING kernel with the GENERAL kernel delta(r+ - r-) kappa~
 * discretized on the grid: density kappa~ / cell volume when r+ and r- fall in
 * the same cell, zero otherwise.
 */
GshsModel with_gridded_general_kernel(const GshsModel& model, const GridSpec& grid);

/// exp(B dt) with per-component (or per-point) exponentials cached for a fixed dt.
class JumpPropagator {
 public:
  JumpPropagator(JumpGenerator gen, double dt, JumpOptions options = {});

  void propagate_inplace(DensityGrid& p) const;
  DensityGrid propagate(const DensityGrid& p) const;

  const JumpGenerator& generator() const { return gen_; }
  double dt() const { return dt_; }
  /// Whether the GENERAL/GRID_DELTA path uses dense component exponentials.
  bool uses_dense() const { return dense_.has_value(); }

 private:
  JumpGenerator gen_;
  double dt_;
  JumpOptions options_;
  std::optional<BlockExponential<double>> dense_;
  std::vector<Eigen::MatrixXd> point_exps_;
  double norm_bound_ = 0.0;
};

DensityGrid propagate_jump(const JumpGenerator& gen, const DensityGrid& p, double dt, const JumpOptions& options = {});

}  // namespace gshs
