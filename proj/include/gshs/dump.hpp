#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gshs/grid.hpp"

namespace gshs {

/// A density snapshot tagged with its simulation time.
struct TimedDensity {
  double time = 0.0;
  DensityGrid density;
};

/**
 * "DGRD v1" binary density dump, little-endian:
 *   "DGRD", u32 version = 1, u32 num_axes, u32 mode_count,
 *   per axis {u32 N_k, f64 L_k, f64 o_k}, f64 time,
 *   mode_count * N_g f64 values (modes outermost, last axis fastest).
 */
void write_dgrd(std::ostream& os, const DensityGrid& d, double time);
void write_dgrd(const std::filesystem::path& path, const DensityGrid& d, double time);
TimedDensity read_dgrd(std::istream& is);
TimedDensity read_dgrd(const std::filesystem::path& path);

/// CSV export: header "mode,r0,..,r{N_r-1},density", one row per point per mode.
void write_density_csv(std::ostream& os, const DensityGrid& d);
void write_density_csv(const std::filesystem::path& path, const DensityGrid& d);

}  // namespace gshs
