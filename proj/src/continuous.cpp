#include "gshs/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "gshs/errors.hpp"
#include "gshs/fourier.hpp"

namespace gshs {
namespace {

constexpr double kPi = std::numbers::pi;

// First-derivative factor 2 pi i n c_n / L with c_n = 0 at n = -N/2.
Complex derivative_factor(const GridSpec& grid, int axis, int slot) {
  const int n = grid.frequency(axis, slot);
  if (n == -grid.count(axis) / 2) return Complex(0.0, 0.0);
  return Complex(0.0, 2.0 * kPi * n / grid.length(axis));
}

Eigen::VectorXcd multiplier_for(const GridSpec& grid, TermKind kind, int a, int b) {
  Eigen::VectorXcd m(grid.num_points());
  for (Index j = 0; j < grid.num_points(); ++j) {
    const int qa = grid.axis_index(j, a);
    switch (kind) {
      case TermKind::kDrift:
        m[j] = -derivative_factor(grid, a, qa);
        break;
      case TermKind::kCrossDiffusion:
        // D symmetric: the (a,b) and (b,a) terms of the double sum coincide.
        m[j] = 2.0 * derivative_factor(grid, a, qa) * derivative_factor(grid, b, grid.axis_index(j, b));
        break;
      case TermKind::kDiffusion: {
        const double n = grid.frequency(a, qa);
        m[j] = Complex(-4.0 * kPi * kPi * n * n / (grid.length(a) * grid.length(a)), 0.0);
        break;
      }
    }
  }
  return m;
}

// Forward DFT (1/N_g) of one complex block in place.
void forward(Eigen::VectorXcd& v, const GridSpec& grid) {
  detail::transform_axes<double>(v, grid, false);
  v /= static_cast<double>(grid.num_points());
}

void inverse(Eigen::VectorXcd& v, const GridSpec& grid) { detail::transform_axes<double>(v, grid, true); }

Index difference_slot(const GridSpec& grid, Index row, Index col) {
  Index diff = 0;
  for (int k = 0; k < grid.num_axes(); ++k) {
    diff += grid.wrap_frequency(k, grid.axis_index(row, k) - grid.axis_index(col, k)) * grid.stride(k);
  }
  return diff;
}

}  // namespace

ContinuousGenerator::ContinuousGenerator(GridSpec grid, int mode, double time, bool time_invariant,
                                         std::vector<GeneratorTerm> terms)
    : grid_(std::move(grid)),
      mode_(mode),
      time_(time),
      time_invariant_(time_invariant),
      terms_(std::move(terms)),
      coupled_(static_cast<std::size_t>(grid_.num_axes()), false) {
  Index support_total = 0;
  for (const auto& term : terms_) {
    support_total += static_cast<Index>(term.support.size());
    for (Index q : term.support) {
      for (int k = 0; k < grid_.num_axes(); ++k) {
        if (grid_.axis_index(q, k) != 0) coupled_[static_cast<std::size_t>(k)] = true;
      }
    }
    norm_bound_ += term.multiplier.cwiseAbs().maxCoeff() * term.coeffs.cwiseAbs().sum();
  }
  // Sparse application costs ~N_g * support_total; the FFT route ~N_g log N_g
  // per term plus one inverse transform.
  const double log_points = std::log2(static_cast<double>(grid_.num_points()) + 1.0);
  const double fft_cost = 2.0 * (static_cast<double>(terms_.size()) + 1.0) * log_points;
  const bool fits = static_cast<double>(support_total) * static_cast<double>(grid_.num_points()) < 5e7;
  if (!terms_.empty() && fits && static_cast<double>(support_total) <= fft_cost) {
    sparse_ = std::make_shared<const Eigen::SparseMatrix<Complex, Eigen::RowMajor>>(sparse_matrix());
  }
}

Complex ContinuousGenerator::entry(Index row, Index col) const {
  const Index diff = difference_slot(grid_, row, col);
  Complex sum(0.0, 0.0);
  for (const auto& term : terms_) sum += term.multiplier[row] * term.coeffs[diff];
  return sum;
}

Index ContinuousGenerator::sparse_nonzeros() const {
  Index support_total = 0;
  for (const auto& term : terms_) support_total += static_cast<Index>(term.support.size());
  return support_total * grid_.num_points();
}

Eigen::SparseMatrix<Complex, Eigen::RowMajor> ContinuousGenerator::sparse_matrix() const {
  const Index n = grid_.num_points();
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(sparse_nonzeros()));
  for (Index row = 0; row < n; ++row) {
    for (const auto& term : terms_) {
      const Complex m = term.multiplier[row];
      if (m == Complex(0.0, 0.0)) continue;
      for (Index q : term.support) {
        // col = row - q slot-wise, so that row - col = q.
        Index col = 0;
        for (int k = 0; k < grid_.num_axes(); ++k) {
          col += grid_.wrap_frequency(k, grid_.axis_index(row, k) - grid_.axis_index(q, k)) * grid_.stride(k);
        }
        triplets.emplace_back(row, col, m * term.coeffs[q]);
      }
    }
  }
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  return A;
}

Eigen::VectorXcd ContinuousGenerator::apply(const Eigen::VectorXcd& x) const {
  if (terms_.empty()) return Eigen::VectorXcd::Zero(x.size());
  if (sparse_) return *sparse_ * x;
  return apply_fft(x);
}

Eigen::VectorXcd ContinuousGenerator::apply_fft(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd values = x;
  inverse(values, grid_);
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  Eigen::VectorXcd product(x.size());
  for (const auto& term : terms_) {
    product = values.cwiseProduct(term.samples.cast<Complex>());
    forward(product, grid_);
    y += term.multiplier.cwiseProduct(product);
  }
  return y;
}

ContinuousGenerator build_generator(const GshsModel& model, const GridSpec& grid, int mode, double t) {
  const int dims = grid.num_axes();
  const Index n = grid.num_points();
  Eigen::MatrixXd drift(n, dims);
  std::vector<Eigen::MatrixXd> diffusion(static_cast<std::size_t>(dims), Eigen::MatrixXd(n, dims));
  for (Index j = 0; j < n; ++j) {
    const State r = grid.point(j);
    const State a = model.drift(t, r, mode);
    const StateMatrix D = diffusion_matrix(model, t, r, mode);
    if (a.size() != dims || D.rows() != dims || D.cols() != dims) {
      throw std::invalid_argument("build_generator: drift/diffusion dimension mismatch");
    }
    if (!a.allFinite() || !D.allFinite()) {
      throw NumericalError("build_generator: non-finite drift or diffusion at grid point " + std::to_string(j));
    }
    drift.row(j) = a.transpose();
    for (int k = 0; k < dims; ++k) diffusion[static_cast<std::size_t>(k)].row(j) = D.row(k);
  }

  std::vector<GeneratorTerm> terms;
  auto add_term = [&](TermKind kind, int a, int b, Eigen::VectorXd samples) {
    if (samples.isZero(0.0)) return;
    GeneratorTerm term;
    term.kind = kind;
    term.axis_a = a;
    term.axis_b = b;
    term.coeffs = samples.cast<Complex>();
    // One mode is enough here: transform the field as a single-mode block.
    forward(term.coeffs, grid);
    for (Index q = 0; q < n; ++q) {
      if (std::abs(term.coeffs[q]) < kCoefficientCutoff) {
        term.coeffs[q] = 0.0;
      } else {
        term.support.push_back(q);
      }
    }
    if (term.support.empty()) return;
    term.samples = std::move(samples);
    term.multiplier = multiplier_for(grid, kind, a, b);
    terms.push_back(std::move(term));
  };

  for (int a = 0; a < dims; ++a) add_term(TermKind::kDrift, a, a, drift.col(a));
  for (int a = 0; a < dims; ++a) {
    for (int b = a + 1; b < dims; ++b) {
      add_term(TermKind::kCrossDiffusion, a, b, diffusion[static_cast<std::size_t>(a)].col(b));
    }
  }
  for (int a = 0; a < dims; ++a) add_term(TermKind::kDiffusion, a, a, diffusion[static_cast<std::size_t>(a)].col(a));

  return ContinuousGenerator(GridSpec(grid.counts(), grid.lengths(), grid.offsets(), 1), mode, t,
                             model.time_invariant, std::move(terms));
}

std::vector<std::vector<Index>> decoupled_blocks(const ContinuousGenerator& gen) {
  const GridSpec& grid = gen.grid();
  const auto& coupled = gen.coupled_axes();
  Index block_count = 1;
  for (int k = 0; k < grid.num_axes(); ++k) {
    if (!coupled[static_cast<std::size_t>(k)]) block_count *= grid.count(k);
  }
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(block_count));
  for (Index j = 0; j < grid.num_points(); ++j) {
    Index id = 0;
    for (int k = 0; k < grid.num_axes(); ++k) {
      if (!coupled[static_cast<std::size_t>(k)]) id = id * grid.count(k) + grid.axis_index(j, k);
    }
    blocks[static_cast<std::size_t>(id)].push_back(j);
  }
  return blocks;
}

namespace {

// Dense exponentials of every decoupled block, or nothing if the blocks do
// not fit the thresholds.
std::optional<BlockExponential<Complex>> dense_exponential(const ContinuousGenerator& gen, double dt,
                                                           const ContinuousOptions& options) {
  if (!options.allow_dense) return std::nullopt;
  auto blocks = decoupled_blocks(gen);
  Index entries = 0;
  for (const auto& b : blocks) {
    const auto size = static_cast<Index>(b.size());
    if (size > options.dense_threshold) return std::nullopt;
    entries += size * size;
  }
  if (entries > options.dense_entry_budget) return std::nullopt;

  BlockExponential<Complex> result;
  Eigen::MatrixXcd block_matrix;
  for (auto& b : blocks) {
    const auto size = static_cast<Index>(b.size());
    block_matrix.resize(size, size);
    for (Index i = 0; i < size; ++i) {
      for (Index k = 0; k < size; ++k) block_matrix(i, k) = gen.entry(b[i], b[k]);
    }
    if (block_matrix.isZero(0.0)) continue;
    result.add(std::move(b), block_matrix, dt);
  }
  return result;
}

}  // namespace

SpectralDensity propagate_continuous(const ContinuousGenerator& gen, const SpectralDensity& f, double dt,
                                     const ContinuousOptions& options) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate_continuous: dt must be positive");
  SpectralDensity out = f;
  if (gen.is_zero()) return out;
  auto block = out.mode(gen.mode());
  if (auto dense = dense_exponential(gen, dt, options)) {
    dense->apply_inplace(block);
  } else {
    block = expmv([&](const Eigen::VectorXcd& x) { return gen.apply(x); }, Eigen::VectorXcd(block), dt,
                  gen.norm_bound(), options.expmv);
  }
  return out;
}

ContinuousPropagator::ContinuousPropagator(const GshsModel& model, GridSpec grid, double dt,
                                           ContinuousOptions options)
    : model_(model), grid_(std::move(grid)), dt_(dt), options_(options) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("ContinuousPropagator: dt must be positive");
  for (int s = 0; s < grid_.mode_count(); ++s) {
    generators_.push_back(build_generator(model_, grid_, s, 0.0));
    const auto& gen = generators_.back();
    if (!model_.time_invariant) {
      methods_.push_back(ContinuousMethod::kRungeKutta);
      dense_.emplace_back();
    } else if (gen.is_zero()) {
      methods_.push_back(ContinuousMethod::kIdentity);
      dense_.emplace_back();
    } else if (auto dense = dense_exponential(gen, dt_, options_)) {
      methods_.push_back(ContinuousMethod::kDenseBlocks);
      dense_.push_back(std::move(*dense));
    } else {
      methods_.push_back(ContinuousMethod::kExpmv);
      dense_.emplace_back();
    }
  }
}

void ContinuousPropagator::propagate_inplace(SpectralDensity& f, double t) const {
  for (int s = 0; s < grid_.mode_count(); ++s) {
    auto block = f.mode(s);
    switch (methods_[static_cast<std::size_t>(s)]) {
      case ContinuousMethod::kIdentity:
        break;
      case ContinuousMethod::kDenseBlocks:
        dense_[static_cast<std::size_t>(s)].apply_inplace(block);
        break;
      case ContinuousMethod::kExpmv: {
        const auto& gen = generators_[static_cast<std::size_t>(s)];
        block = expmv([&](const Eigen::VectorXcd& x) { return gen.apply(x); }, Eigen::VectorXcd(block), dt_,
                      gen.norm_bound(), options_.expmv);
        break;
      }
      case ContinuousMethod::kRungeKutta:
        rk4_mode(block, s, t);
        break;
    }
  }
}

SpectralDensity ContinuousPropagator::propagate(const SpectralDensity& f, double t) const {
  SpectralDensity out = f;
  propagate_inplace(out, t);
  return out;
}

void ContinuousPropagator::rk4_mode(Eigen::Ref<Eigen::VectorXcd> coeffs, int s, double t) const {
  const double norm = generators_[static_cast<std::size_t>(s)].norm_bound();
  const int substeps = std::max(options_.rk4_substeps, static_cast<int>(std::ceil(norm * dt_ / 2.0)));
  const double h = dt_ / substeps;
  Eigen::VectorXcd y = coeffs;
  for (int i = 0; i < substeps; ++i) {
    const double t0 = t + i * h;
    const auto A0 = build_generator(model_, grid_, s, t0);
    const auto Ah = build_generator(model_, grid_, s, t0 + 0.5 * h);
    const auto A1 = build_generator(model_, grid_, s, t0 + h);
    const Eigen::VectorXcd k1 = A0.apply(y);
    const Eigen::VectorXcd k2 = Ah.apply(y + 0.5 * h * k1);
    const Eigen::VectorXcd k3 = Ah.apply(y + 0.5 * h * k2);
    const Eigen::VectorXcd k4 = A1.apply(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  coeffs = y;
}

}  // namespace gshs
