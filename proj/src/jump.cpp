#include "gshs/jump.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gshs/errors.hpp"

namespace gshs {
namespace {

double checked_rate(const GshsModel& model, const State& r, int s) {
  const double lambda = model.rate(r, s);
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw NumericalError("jump rate must be finite and nonnegative, got " + std::to_string(lambda));
  }
  return lambda;
}

struct DisjointSets {
  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index(0));
  }
  Index find(Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<Index> parent;
};

JumpGenerator build_general(const GshsModel& model, const GeneralKernel& kernel, const GridSpec& grid,
                            const JumpOptions& options) {
  JumpGenerator gen(grid, JumpKind::kGeneral);
  const Index ng = grid.num_points();
  const int ns = grid.mode_count();
  const double cell = grid.cell_volume();
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<Index, double>> gains;
  for (int n = 0; n < ns; ++n) {
    for (Index m = 0; m < ng; ++m) {
      const State from = grid.point(m);
      const double lambda = checked_rate(model, from, n);
      if (lambda == 0.0) continue;
      gains.clear();
      double total = 0.0;
      for (int j = 0; j < ns; ++j) {
        for (Index i = 0; i < ng; ++i) {
          const double k = kernel.density(from, n, grid.point(i), j);
          if (!std::isfinite(k)) {
            throw NumericalError("GENERAL kernel is non-finite at grid pair (" + std::to_string(m) + ", " +
                                 std::to_string(i) + ")");
          }
          if (k == 0.0) continue;
          gains.emplace_back(j * ng + i, k * cell);
          total += k * cell;
        }
      }
      double scale = 1.0;
      if (options.normalize_kernel) {
        if (!(total > 0.0)) throw NumericalError("jump kernel has no mass on the grid from point " + std::to_string(m));
        scale = 1.0 / total;
      }
      const Index src = n * ng + m;
      for (const auto& [dst, w] : gains) triplets.emplace_back(dst, src, w * scale * lambda);
      triplets.emplace_back(src, src, -lambda);
    }
  }
  gen.sparse.resize(grid.size(), grid.size());
  gen.sparse.setFromTriplets(triplets.begin(), triplets.end());
  return gen;
}

JumpGenerator build_grid_delta(const GshsModel& model, const GridDeltaKernel& kernel, const GridSpec& grid,
                               const JumpOptions& options) {
  JumpGenerator gen(grid, JumpKind::kGridDelta);
  const Index ng = grid.num_points();
  std::vector<bool> is_delta(static_cast<std::size_t>(grid.num_axes()), false);
  for (int axis : kernel.delta_axes) {
    if (axis < 0 || axis >= grid.num_axes()) throw std::invalid_argument("GRID_DELTA: delta axis out of range");
    is_delta[static_cast<std::size_t>(axis)] = true;
  }
  std::vector<int> free_axes;
  double free_volume = 1.0;
  Index free_count = 1;
  for (int k = 0; k < grid.num_axes(); ++k) {
    if (is_delta[static_cast<std::size_t>(k)]) continue;
    free_axes.push_back(k);
    free_volume *= grid.spacing(k);
    free_count *= grid.count(k);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<Index, double>> gains;
  for (int n = 0; n < grid.mode_count(); ++n) {
    for (Index m = 0; m < ng; ++m) {
      const State from = grid.point(m);
      const double lambda = checked_rate(model, from, n);
      if (lambda == 0.0) continue;
      const HybridState image = kernel.reset(from, n);
      if (image.s < 0 || image.s >= grid.mode_count()) throw NumericalError("GRID_DELTA reset mode out of range");
      Index base = 0;
      for (int axis : kernel.delta_axes) {
        if (!std::isfinite(image.r[axis])) throw NumericalError("GRID_DELTA reset image is non-finite");
        base += grid.nearest_index(axis, image.r[axis]) * grid.stride(axis);
      }
      gains.clear();
      double total = 0.0;
      for (Index c = 0; c < free_count; ++c) {
        Index rest = c, dst = base;
        for (auto it = free_axes.rbegin(); it != free_axes.rend(); ++it) {
          dst += (rest % grid.count(*it)) * grid.stride(*it);
          rest /= grid.count(*it);
        }
        const double k = kernel.residual_density(from, n, grid.point(dst));
        if (!std::isfinite(k)) throw NumericalError("GRID_DELTA residual density is non-finite");
        if (k == 0.0) continue;
        // The delta contributes 1 / (delta-cell volume), so kappa * Delta
        // reduces to the residual density times the free-axis cell volume.
        gains.emplace_back(image.s * ng + dst, k * free_volume);
        total += k * free_volume;
      }
      double scale = 1.0;
      if (options.normalize_kernel) {
        if (!(total > 0.0)) throw NumericalError("jump kernel has no mass on the grid from point " + std::to_string(m));
        scale = 1.0 / total;
      }
      const Index src = n * ng + m;
      for (const auto& [dst, w] : gains) triplets.emplace_back(dst, src, w * scale * lambda);
      triplets.emplace_back(src, src, -lambda);
    }
  }
  gen.sparse.resize(grid.size(), grid.size());
  gen.sparse.setFromTriplets(triplets.begin(), triplets.end());
  return gen;
}

JumpGenerator build_switching(const GshsModel& model, const SwitchingKernel& kernel, const GridSpec& grid) {
  JumpGenerator gen(grid, JumpKind::kSwitching);
  const int ns = grid.mode_count();
  Eigen::MatrixXd M(ns, ns);
  for (Index j = 0; j < grid.num_points(); ++j) {
    const State r = grid.point(j);
    bool any = false;
    for (int from = 0; from < ns; ++from) {
      const double lambda = checked_rate(model, r, from);
      any = any || lambda > 0.0;
      for (int to = 0; to < ns; ++to) {
        const double p = lambda == 0.0 ? 0.0 : kernel.mode_probability(r, from, to);
        if (!std::isfinite(p)) throw NumericalError("SWITCHING mode kernel is non-finite");
        M(to, from) = p * lambda - (to == from ? lambda : 0.0);
      }
    }
    if (!any) continue;
    gen.points.push_back(j);
    gen.point_matrices.push_back(M);
  }
  return gen;
}

}  // namespace

bool JumpGenerator::is_zero() const {
  if (kind_ == JumpKind::kSwitching) return points.empty();
  for (Index c = 0; c < sparse.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sparse, c); it; ++it) {
      if (it.value() != 0.0) return false;
    }
  }
  return true;
}

Eigen::SparseMatrix<double> JumpGenerator::matrix() const {
  if (kind_ != JumpKind::kSwitching) return sparse;
  const Index ng = grid_.num_points();
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& M = point_matrices[i];
    for (Index to = 0; to < M.rows(); ++to) {
      for (Index from = 0; from < M.cols(); ++from) {
        if (M(to, from) != 0.0) triplets.emplace_back(to * ng + points[i], from * ng + points[i], M(to, from));
      }
    }
  }
  Eigen::SparseMatrix<double> B(grid_.size(), grid_.size());
  B.setFromTriplets(triplets.begin(), triplets.end());
  return B;
}

JumpGenerator build_jump_generator(const GshsModel& model, const GridSpec& grid, const JumpOptions& options) {
  if (grid.mode_count() != model.mode_count) throw std::invalid_argument("jump generator: grid/model mode mismatch");
  return std::visit(
      [&](const auto& kernel) -> JumpGenerator {
        using K = std::decay_t<decltype(kernel)>;
        if constexpr (std::is_same_v<K, GeneralKernel>) {
          return build_general(model, kernel, grid, options);
        } else if constexpr (std::is_same_v<K, GridDeltaKernel>) {
          return build_grid_delta(model, kernel, grid, options);
        } else {
          return build_switching(model, kernel, grid);
        }
      },
      model.kernel);
}

GshsModel with_gridded_general_kernel(const GshsModel& model, const GridSpec& grid) {
  const auto* switching = std::get_if<SwitchingKernel>(&model.kernel);
  if (switching == nullptr) throw std::invalid_argument("with_gridded_general_kernel: model kernel is not SWITCHING");
  GshsModel out = model;
  const double inv_cell = 1.0 / grid.cell_volume();
  GeneralKernel general;
  general.density = [grid, inv_cell, probability = switching->mode_probability](
                        const State& from, int s_from, const State& to, int s_to) {
    for (int k = 0; k < grid.num_axes(); ++k) {
      if (grid.nearest_index(k, from[k]) != grid.nearest_index(k, to[k])) return 0.0;
    }
    return probability(from, s_from, s_to) * inv_cell;
  };
  general.sample = [original = model](const HybridState& from, RandomSource& rng) {
    return sample_kernel(original, from, rng);
  };
  out.kernel = std::move(general);
  return out;
}

JumpPropagator::JumpPropagator(JumpGenerator gen, double dt, JumpOptions options)
    : gen_(std::move(gen)), dt_(dt), options_(options) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("JumpPropagator: dt must be positive");
  if (gen_.kind() == JumpKind::kSwitching) {
    point_exps_.reserve(gen_.point_matrices.size());
    for (const auto& M : gen_.point_matrices) point_exps_.push_back((M * dt_).exp());
    return;
  }

  const auto& B = gen_.sparse;
  const Index n = B.rows();
  DisjointSets sets(n);
  std::vector<bool> active(static_cast<std::size_t>(n), false);
  for (Index c = 0; c < B.outerSize(); ++c) {
    double column = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(B, c); it; ++it) {
      if (it.value() == 0.0) continue;
      active[it.row()] = active[c] = true;
      sets.unite(it.row(), c);
      column += std::abs(it.value());
    }
    norm_bound_ = std::max(norm_bound_, column);
  }
  if (!options_.allow_dense || norm_bound_ == 0.0) return;

  std::vector<std::vector<Index>> components;
  std::vector<Index> component_of(static_cast<std::size_t>(n), -1);
  std::vector<Index> root_slot(static_cast<std::size_t>(n), -1);
  Index entries = 0;
  for (Index i = 0; i < n; ++i) {
    if (!active[i]) continue;
    const Index root = sets.find(i);
    if (root_slot[root] < 0) {
      root_slot[root] = static_cast<Index>(components.size());
      components.emplace_back();
    }
    component_of[i] = root_slot[root];
    components[root_slot[root]].push_back(i);
  }
  for (const auto& comp : components) {
    const auto size = static_cast<Index>(comp.size());
    if (size > options_.dense_threshold) return;
    entries += size * size;
  }
  if (entries > options_.dense_entry_budget) return;

  BlockExponential<double> dense;
  std::vector<Index> local(static_cast<std::size_t>(n), -1);
  for (auto& comp : components) {
    const auto size = static_cast<Index>(comp.size());
    for (Index k = 0; k < size; ++k) local[comp[k]] = k;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(size, size);
    for (Index k = 0; k < size; ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(B, comp[k]); it; ++it) block(local[it.row()], k) = it.value();
    }
    dense.add(std::move(comp), block, dt_);
  }
  dense_ = std::move(dense);
}

void JumpPropagator::propagate_inplace(DensityGrid& p) const {
  if (!(p.grid() == gen_.grid())) throw std::invalid_argument("JumpPropagator: density grid mismatch");
  auto& values = p.values();
  if (gen_.kind() == JumpKind::kSwitching) {
    const Index ng = gen_.grid().num_points();
    const int ns = gen_.grid().mode_count();
    Eigen::VectorXd local(ns);
    for (std::size_t i = 0; i < point_exps_.size(); ++i) {
      const Index j = gen_.points[i];
      for (int s = 0; s < ns; ++s) local[s] = values[s * ng + j];
      local = point_exps_[i] * local;
      for (int s = 0; s < ns; ++s) values[s * ng + j] = local[s];
    }
    return;
  }
  if (norm_bound_ == 0.0) return;
  if (dense_) {
    dense_->apply_inplace(values);
    return;
  }
  const auto& B = gen_.sparse;
  values = expmv([&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return B * x; }, Eigen::VectorXd(values), dt_,
                 norm_bound_, options_.expmv);
}

DensityGrid JumpPropagator::propagate(const DensityGrid& p) const {
  DensityGrid out = p;
  propagate_inplace(out);
  return out;
}

DensityGrid propagate_jump(const JumpGenerator& gen, const DensityGrid& p, double dt, const JumpOptions& options) {
  return JumpPropagator(gen, dt, options).propagate(p);
}

}  // namespace gshs
