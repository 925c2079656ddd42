#pragma once

#include <cmath>

#include "lcflow/littlewood_paley.hpp"
#include "lcflow/spectral_field.hpp"

namespace lcflow {

enum class NormForm { fourier, lp };

/// (sum_q 2^{2qs} ||Delta_q f||^2)^{1/2}.
inline double hs_norm_lp(const SpectralField& f, double s) {
  const auto e = block_energies(f, DyadicPartition::shared(f.grid()));
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) sum += std::pow(2.0, 2.0 * s * (static_cast<int>(i) - 1)) * e[i];
  return std::sqrt(sum);
}

/// Sobolev norm; at s = 0 both forms return the L^2 norm itself.
inline double hs_norm(const SpectralField& f, double s, NormForm form = NormForm::fourier) {
  if (!std::isfinite(s)) throw DomainError("Sobolev index must be finite");
  if (s == 0.0) return l2_norm(f);
  return form == NormForm::fourier ? hs_norm_fourier(f, s) : hs_norm_lp(f, s);
}

inline double hs_norm(const VectorField2& u, double s, NormForm form = NormForm::fourier) {
  return std::hypot(hs_norm(u[0], s, form), hs_norm(u[1], s, form));
}

}  // namespace lcflow
