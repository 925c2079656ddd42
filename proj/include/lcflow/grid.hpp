#pragma once

#include <string>

#include "lcflow/errors.hpp"

namespace lcflow {

/// Oversampling used when nonlinear products are formed in physical space.
enum class Padding { none, three_halves, two };

inline std::string to_string(Padding p) {
  switch (p) {
    case Padding::none: return "1";
    case Padding::three_halves: return "3/2";
    case Padding::two: return "2";
  }
  return "?";
}

inline Padding parse_padding(const std::string& text) {
  if (text == "1" || text == "none") return Padding::none;
  if (text == "3/2" || text == "1.5") return Padding::three_halves;
  if (text == "2") return Padding::two;
  throw ConfigError("padding must be one of 1, 3/2, 2 (got '" + text + "')");
}

/// Square N x N discretisation of the torus. Nodes sit at x_j = 2*pi*j/N on both axes.
struct GridSpec {
  int n = 64;
  Padding padding = Padding::two;

  void validate() const {
    if (n < 8 || n % 2 != 0) {
      throw ConfigError("grid size must be even and >= 8 (got " + std::to_string(n) + ")");
    }
  }

  int padded_size() const {
    switch (padding) {
      case Padding::none: return n;
      case Padding::three_halves: return 3 * n / 2;
      case Padding::two: return 2 * n;
    }
    return n;
  }

  /// Largest |k_i| kept on the grid; the Nyquist index n/2 is always zero.
  int k_max() const { return n / 2 - 1; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Signed wavenumber stored at FFT index `index` of an axis of length `n`.
inline int wavenumber(int index, int n) { return index <= n / 2 ? index : index - n; }

/// FFT index of signed wavenumber `k` on an axis of length `n`.
inline int fft_index(int k, int n) { return k >= 0 ? k : k + n; }

}  // namespace lcflow
