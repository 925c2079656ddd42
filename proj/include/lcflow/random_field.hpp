#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "lcflow/spectral_field.hpp"

namespace lcflow {

using Rng = std::mt19937_64;

/// Real field with independent complex gaussian coefficients of standard deviation
/// (1+|n|)^{-decay}, restricted to |n| <= band (band < 0 means the whole grid).
inline SpectralField random_field(const GridSpec& grid, Rng& rng, double decay, double band = -1.0) {
  SpectralField f(grid);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = grid.n;
  auto c = f.coeffs();
  for (int i0 = 0; i0 < n; ++i0) {
    const int k0 = wavenumber(i0, n);
    for (int i1 = 0; i1 < n; ++i1) {
      const int k1 = wavenumber(i1, n);
      const double r = std::hypot(k0, k1);
      // Draw for every index so the stream does not depend on the band.
      const double a = gauss(rng);
      const double b = gauss(rng);
      if (band >= 0.0 && r > band) continue;
      c[static_cast<std::size_t>(i0) * n + i1] = std::pow(1.0 + r, -decay) * cplx(a, b) / std::sqrt(2.0);
    }
  }
  f.enforce_invariants();
  return f;
}

inline VectorField2 random_vector_field(const GridSpec& grid, Rng& rng, double decay, double band = -1.0) {
  SpectralField a = random_field(grid, rng, decay, band);
  SpectralField b = random_field(grid, rng, decay, band);
  return {std::move(a), std::move(b)};
}

/// Leray-projected, zero-mean random velocity.
inline VectorField2 random_solenoidal(const GridSpec& grid, Rng& rng, double decay, double band = -1.0) {
  VectorField2 u = leray_project(random_vector_field(grid, rng, decay, band));
  u[0].at(0, 0) = 0.0;
  u[1].at(0, 0) = 0.0;
  return u;
}

}  // namespace lcflow
