#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gshs/expm.hpp"
#include "gshs/grid.hpp"
#include "gshs/model.hpp"

namespace gshs {

using Complex = std::complex<double>;

enum class TermKind {
  kDrift,           // -(2 pi i n_a c_{n_a} / L_a) (f[a_a] * f[p])_n
  kCrossDiffusion,  // -2 (4 pi^2 n_a n_b c_{n_a} c_{n_b} / L_a L_b) (f[D_ab] * f[p])_n, a < b
  kDiffusion,       // -(4 pi^2 n_a^2 / L_a^2) (f[D_aa] * f[p])_n
};

/// One convolution term of the continuous generator: a frequency multiplier
/// times wrapped convolution with the Fourier coefficients of a field.
struct GeneratorTerm {
  TermKind kind = TermKind::kDrift;
  int axis_a = 0;
  int axis_b = 0;
  Eigen::VectorXd samples;      // field values at the grid points
  Eigen::VectorXcd coeffs;      // DFT of samples, tiny entries dropped
  std::vector<Index> support;   // slots of the nonzero coefficients
  Eigen::VectorXcd multiplier;  // factor applied to output row n
};

/**
 * Continuous generator A(t, s) acting on the Fourier coefficients of one mode.
 *
 * Entry (n, k) is sum_terms multiplier_n * coeffs[n - k], the index
 * difference wrapped by N-periodicity on each axis. Application goes through
 * an explicit sparse matrix when the fields are band-limited, and through
 * FFT-based pseudo-spectral products otherwise; both evaluate the same sums.
 */
class ContinuousGenerator {
 public:
  ContinuousGenerator(GridSpec grid, int mode, double time, bool time_invariant,
                      std::vector<GeneratorTerm> terms);

  const GridSpec& grid() const { return grid_; }
  int mode() const { return mode_; }
  double time() const { return time_; }
  bool time_invariant() const { return time_invariant_; }
  std::span<const GeneratorTerm> terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Complex entry(Index row, Index col) const;
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> sparse_matrix() const;
  /// Number of structural nonzeros of the sparse form.
  Index sparse_nonzeros() const;
  bool uses_sparse_route() const { return sparse_ != nullptr; }

  /// y = A x for one mode's coefficient vector.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  /// Bound on the 1- and infinity-norms of A.
  double norm_bound() const { return norm_bound_; }
  /// Axes along which some field varies; A decouples over the others.
  const std::vector<bool>& coupled_axes() const { return coupled_; }

 private:
  Eigen::VectorXcd apply_fft(const Eigen::VectorXcd& x) const;

  GridSpec grid_;
  int mode_;
  double time_;
  bool time_invariant_;
  std::vector<GeneratorTerm> terms_;
  std::vector<bool> coupled_;
  double norm_bound_ = 0.0;
  std::shared_ptr<const Eigen::SparseMatrix<Complex, Eigen::RowMajor>> sparse_;
};

/// Coefficients with magnitude below this are dropped from the operator.
inline constexpr double kCoefficientCutoff = 1e-14;

/// Builds A(t, s) from the model's drift and D = 1/2 b b^T sampled on the grid.
/// Throws NumericalError on non-finite field values.
ContinuousGenerator build_generator(const GshsModel& model, const GridSpec& grid, int mode, double t);

enum class ContinuousMethod { kIdentity, kDenseBlocks, kExpmv, kRungeKutta };

struct ContinuousOptions {
  /// Largest decoupled block for which exp(A dt) is precomputed densely.
  Index dense_threshold = 4096;
  /// Total dense entries per mode allowed for the precomputed blocks.
  Index dense_entry_budget = Index(1) << 23;
  bool allow_dense = true;
  ExpmvOptions expmv;
  /// Minimum fixed RK4 substeps per step for time-variant fields.
  int rk4_substeps = 4;
};

/// Index blocks over which A decouples: one block per combination of slots on
/// the uncoupled axes, spanning all slots of the coupled axes.
std::vector<std::vector<Index>> decoupled_blocks(const ContinuousGenerator& gen);

/**
 * exp(A(s) dt) applied to mode s of f. Dense block exponentials when every
 * decoupled block fits the thresholds, otherwise the Taylor exponential action.
 */
SpectralDensity propagate_continuous(const ContinuousGenerator& gen, const SpectralDensity& f,
                                     double dt, const ContinuousOptions& options = {});

/**
 * Continuous stage of the splitting scheme for a fixed step dt, with the
 * per-mode exponentials cached at construction. Time-variant models are
 * integrated with fixed-step RK4, rebuilding A at the stage times.
 */
class ContinuousPropagator {
 public:
  ContinuousPropagator(const GshsModel& model, GridSpec grid, double dt, ContinuousOptions options = {});

  /// Propagates every mode of f from t to t + dt.
  void propagate_inplace(SpectralDensity& f, double t) const;
  SpectralDensity propagate(const SpectralDensity& f, double t) const;

  double dt() const { return dt_; }
  ContinuousMethod method(int s) const { return methods_[s]; }
  const ContinuousGenerator& generator(int s) const { return generators_[s]; }

 private:
  void rk4_mode(Eigen::Ref<Eigen::VectorXcd> coeffs, int s, double t) const;

  GshsModel model_;
  GridSpec grid_;
  double dt_;
  ContinuousOptions options_;
  std::vector<ContinuousGenerator> generators_;
  std::vector<ContinuousMethod> methods_;
  std::vector<BlockExponential<Complex>> dense_;
};

}  // namespace gshs
