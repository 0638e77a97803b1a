#include "gshs/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gshs/errors.hpp"

namespace gshs {

StateMatrix diffusion_matrix(const GshsModel& model, double t, const State& r, int s) {
  const StateMatrix b = model.diffusion(t, r, s);
  return 0.5 * b * b.transpose();
}

DensityGrid density_from(const Distribution& dist, const GridSpec& grid) {
  DensityGrid d = sample_on_grid(grid, dist.pdf);
  normalize(d);
  return d;
}

DensityGrid initial_density(const GshsModel& model, const GridSpec& grid) {
  return density_from(model.initial, grid);
}

HybridState sample_kernel(const GshsModel& model, const HybridState& from, RandomSource& rng) {
  if (const auto* k = std::get_if<SwitchingKernel>(&model.kernel)) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (int to = 0; to < model.mode_count; ++to) {
      cumulative += k->mode_probability(from.r, from.s, to);
      if (u < cumulative) return {from.r, to};
    }
    return from;
  }
  const KernelSampler* sampler = nullptr;
  if (const auto* k = std::get_if<GridDeltaKernel>(&model.kernel)) sampler = &k->sample;
  if (const auto* k = std::get_if<GeneralKernel>(&model.kernel)) sampler = &k->sample;
  if (sampler == nullptr || !*sampler) {
    throw std::invalid_argument("model '" + model.name + "' has no kernel sampler");
  }
  return (*sampler)(from, rng);
}

bool ValidationReport::has_violation(const std::string& kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Diagnostic& d) { return d.kind == kind; });
}

ValidationReport validate(const GshsModel& model, const GridSpec& grid) {
  ValidationReport report;
  auto violation = [&](std::string kind, std::string message) {
    report.violations.push_back({std::move(kind), std::move(message)});
  };
  if (grid.num_axes() != model.num_axes) {
    violation("grid dimension", "grid has " + std::to_string(grid.num_axes()) + " axes, model " +
                                    std::to_string(model.num_axes));
    return report;
  }
  if (grid.mode_count() != model.mode_count) {
    violation("grid modes", "grid has " + std::to_string(grid.mode_count()) + " modes, model " +
                                std::to_string(model.mode_count));
    return report;
  }

  Index negative_rates = 0, bad_rows = 0, bad_fields = 0;
  double worst_row_error = 0.0, worst_snap = 0.0;
  const auto* switching = std::get_if<SwitchingKernel>(&model.kernel);
  const auto* grid_delta = std::get_if<GridDeltaKernel>(&model.kernel);

  for (int s = 0; s < model.mode_count; ++s) {
    for (Index j = 0; j < grid.num_points(); ++j) {
      const State r = grid.point(j);
      const double lambda = model.rate(r, s);
      if (!(lambda >= 0.0) || !std::isfinite(lambda)) ++negative_rates;

      const State a = model.drift(0.0, r, s);
      const StateMatrix b = model.diffusion(0.0, r, s);
      if (!a.allFinite() || !b.allFinite() || a.size() != model.num_axes || b.rows() != model.num_axes) {
        ++bad_fields;
      }

      if (switching != nullptr) {
        double row = 0.0;
        bool negative = false;
        for (int to = 0; to < model.mode_count; ++to) {
          const double p = switching->mode_probability(r, s, to);
          negative = negative || p < 0.0;
          row += p;
        }
        const double err = std::abs(row - 1.0);
        worst_row_error = std::max(worst_row_error, err);
        if (err > 1e-9 || negative) ++bad_rows;
      }
      if (grid_delta != nullptr && lambda > 0.0) {
        const HybridState image = grid_delta->reset(r, s);
        for (int axis : grid_delta->delta_axes) {
          const double snapped = grid.coordinate(axis, grid.nearest_index(axis, image.r[axis]));
          worst_snap = std::max(worst_snap, std::abs(snapped - image.r[axis]));
        }
      }
    }
  }
  if (negative_rates > 0) {
    violation("negative rate", std::to_string(negative_rates) + " grid points have a negative or non-finite rate");
  }
  if (bad_fields > 0) {
    violation("non-finite field", std::to_string(bad_fields) + " grid points have invalid drift/diffusion");
  }
  if (bad_rows > 0) {
    std::ostringstream os;
    os << bad_rows << " kernel rows do not sum to 1 (worst error " << worst_row_error << ")";
    violation("kernel row sum", os.str());
  }
  if (grid_delta != nullptr) {
    std::ostringstream os;
    os << "largest reset-to-grid snap error " << worst_snap;
    report.notes.push_back({"snap error", os.str()});
  }

  const DensityGrid init = sample_on_grid(grid, model.initial.pdf);
  const double m = mass(init);
  if (!(init.values().minCoeff() >= 0.0)) violation("initial density", "initial density has negative values");
  if (!(std::abs(m - 1.0) <= 1e-3)) {
    std::ostringstream os;
    os << "initial density integrates to " << m << " on the grid";
    violation("initial density normalization", os.str());
  }
  return report;
}

}  // namespace gshs
