#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gshs/errors.hpp"
#include "gshs/grid.hpp"

namespace gshs {

namespace detail {

// Unnormalized multi-axis transform of one mode block (N_g contiguous values).
template <typename Real, typename Block>
void transform_axes(Block&& block, const GridSpec& grid, bool inverse) {
  using Complex = std::complex<Real>;
  Eigen::FFT<Real> fft;
  fft.SetFlag(Eigen::FFT<Real>::Unscaled);
  std::vector<Complex> line, out;
  const Index total = grid.num_points();
  for (int k = 0; k < grid.num_axes(); ++k) {
    const Index n = grid.count(k);
    const Index stride = grid.stride(k);
    const Index outer = total / (n * stride);
    line.resize(n);
    out.resize(n);
    for (Index o = 0; o < outer; ++o) {
      for (Index i = 0; i < stride; ++i) {
        const Index start = o * n * stride + i;
        for (Index q = 0; q < n; ++q) line[q] = block[start + q * stride];
        if (inverse) {
          fft.inv(out.data(), line.data(), n);
        } else {
          fft.fwd(out.data(), line.data(), n);
        }
        for (Index q = 0; q < n; ++q) block[start + q * stride] = out[q];
      }
    }
  }
}

}  // namespace detail

/**
 * Forward DFT per mode with the 1/N_g normalization:
 *   c_n = (1/N_g) sum_j d_j exp(-2 pi i sum_k n_k (r_j - o_k) / L_k).
 * Coefficients are stored in natural FFT order on every axis.
 */
template <typename Real>
GridField<std::complex<Real>> dft(const GridField<Real>& d) {
  const GridSpec& grid = d.grid();
  GridField<std::complex<Real>> f(grid, d.values().template cast<std::complex<Real>>());
  const Real scale = Real(1) / static_cast<Real>(grid.num_points());
  for (int s = 0; s < grid.mode_count(); ++s) {
    auto block = f.mode(s);
    detail::transform_axes<Real>(block, grid, false);
    block *= scale;
  }
  return f;
}

/// Inverse DFT to complex grid values (no realness check).
template <typename Real>
GridField<std::complex<Real>> idft_complex(const GridField<std::complex<Real>>& f) {
  GridField<std::complex<Real>> out = f;
  for (int s = 0; s < f.grid().mode_count(); ++s) {
    auto block = out.mode(s);
    detail::transform_axes<Real>(block, f.grid(), true);
  }
  return out;
}

/// Largest imaginary part tolerated when returning to real grid values.
inline constexpr double kMaxImaginaryResidue = 1e-6;

/**
 * Inverse DFT back to real grid values. The imaginary residue is discarded;
 * a residue above kMaxImaginaryResidue signals corrupted coefficients and
 * raises NumericalError.
 */
template <typename Real>
GridField<Real> idft(const GridField<std::complex<Real>>& f) {
  const auto g = idft_complex(f);
  const Real residue = g.values().imag().cwiseAbs().maxCoeff();
  if (!(residue <= static_cast<Real>(kMaxImaginaryResidue))) {
    throw NumericalError("idft: imaginary residue " + std::to_string(static_cast<double>(residue)) +
                         " exceeds tolerance");
  }
  return GridField<Real>(f.grid(), g.values().real());
}

/// Trigonometric interpolation of mode s at an arbitrary point; real part.
template <typename Real>
Real evaluate_between_grid(const GridField<std::complex<Real>>& f, const State& r, int s) {
  using Complex = std::complex<Real>;
  const GridSpec& grid = f.grid();
  std::vector<std::vector<Complex>> phase(grid.num_axes());
  for (int k = 0; k < grid.num_axes(); ++k) {
    phase[k].resize(grid.count(k));
    const Real x = static_cast<Real>((r[k] - grid.offset(k)) / grid.length(k));
    for (int q = 0; q < grid.count(k); ++q) {
      const Real arg = 2 * std::numbers::pi_v<Real> * grid.frequency(k, q) * x;
      phase[k][q] = Complex(std::cos(arg), std::sin(arg));
    }
  }
  const auto block = f.mode(s);
  Complex sum(0);
  for (Index j = 0; j < grid.num_points(); ++j) {
    Complex term = block[j];
    for (int k = 0; k < grid.num_axes(); ++k) term *= phase[k][grid.axis_index(j, k)];
    sum += term;
  }
  return sum.real();
}

/// Signed frequency of every coefficient slot along one axis.
Eigen::VectorXd frequencies_along(const GridSpec& grid, int axis);

}  // namespace gshs
