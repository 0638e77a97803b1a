#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "gshs/errors.hpp"
#include "gshs/grid.hpp"

namespace gshs {

struct ExpmvOptions {
  /// Relative tolerance on the truncated Taylor remainder per substep.
  double tolerance = 1e-10;
  /// Substep size is chosen so that |A h| <= theta for the given norm bound.
  double theta = 1.0;
  int max_terms = 80;
};

/**
 * Action exp(t A) v of an operator known only through apply(x) = A x, by a
 * scaled truncated Taylor series. norm_bound must bound an induced norm of A;
 * it sets the number of substeps. Throws NumericalError if a substep's series
 * has not converged after max_terms terms.
 */
template <typename Vector, typename Apply>
Vector expmv(Apply&& apply, Vector v, double t, double norm_bound, const ExpmvOptions& options = {}) {
  const double scaled = std::abs(t) * norm_bound;
  if (scaled == 0.0) return v;
  const int substeps = std::max(1, static_cast<int>(std::ceil(scaled / options.theta)));
  const double h = t / substeps;
  for (int step = 0; step < substeps; ++step) {
    Vector term = v;
    Vector sum = v;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1;; ++k) {
      term = apply(term);
      term *= h / k;
      sum += term;
      const double term_norm = term.cwiseAbs().maxCoeff();
      const double sum_norm = sum.cwiseAbs().maxCoeff();
      if (term_norm == 0.0 || term_norm + previous <= options.tolerance * sum_norm) break;
      if (!std::isfinite(term_norm) || k >= options.max_terms) {
        throw NumericalError("expmv: Taylor series did not converge within " +
                             std::to_string(options.max_terms) + " terms");
      }
      previous = term_norm;
    }
    v = std::move(sum);
  }
  return v;
}

/**
 * exp(t A) for an operator that is block diagonal after a permutation: each
 * block is a list of global indices with its dense exponential. Indices not
 * covered by any block are left unchanged (zero rows and columns of A).
 */
template <typename Scalar>
class BlockExponential {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Stores exp(t * generator) for the block over the given indices.
  void add(std::vector<Index> indices, const Matrix& generator, double t) {
    if (indices.size() == 1) {
      scalar_index_.push_back(indices.front());
      scalar_factor_.push_back(std::exp(generator(0, 0) * t));
      return;
    }
    Matrix scaled = generator * Scalar(t);
    exps_.push_back(scaled.exp());
    indices_.push_back(std::move(indices));
  }

  template <typename Derived>
  void apply_inplace(Eigen::MatrixBase<Derived>& x) const {
    Vector gathered, result;
    for (std::size_t b = 0; b < exps_.size(); ++b) {
      const auto& idx = indices_[b];
      gathered.resize(static_cast<Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) gathered[static_cast<Index>(i)] = x[idx[i]];
      result.noalias() = exps_[b] * gathered;
      for (std::size_t i = 0; i < idx.size(); ++i) x[idx[i]] = result[static_cast<Index>(i)];
    }
    for (std::size_t i = 0; i < scalar_index_.size(); ++i) x[scalar_index_[i]] *= scalar_factor_[i];
  }

  std::size_t block_count() const { return exps_.size() + scalar_index_.size(); }
  Index stored_entries() const {
    Index n = static_cast<Index>(scalar_index_.size());
    for (const auto& e : exps_) n += e.size();
    return n;
  }

 private:
  std::vector<std::vector<Index>> indices_;
  std::vector<Matrix> exps_;
  std::vector<Index> scalar_index_;
  std::vector<Scalar> scalar_factor_;
};

}  // namespace gshs
