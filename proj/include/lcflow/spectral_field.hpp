#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "lcflow/errors.hpp"
#include "lcflow/fft.hpp"
#include "lcflow/grid.hpp"

namespace lcflow {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double torus_area = two_pi * two_pi;

/// Fourier coefficients f_n, |n_i| < N/2, of a field on the torus, stored N x N
/// row-major in FFT order (first index = x wavenumber). Normalisation:
/// f_n = (2 pi)^-2 * integral of f e^{-i n.x}.
///
/// A field flagged real keeps exact Hermitian symmetry; every operation in this
/// library that maps real fields to real fields preserves the flag.
class SpectralField {
 public:
  SpectralField() = default;

  explicit SpectralField(const GridSpec& grid, bool real_valued = true)
      : grid_(grid), real_(real_valued), coeffs_(static_cast<std::size_t>(grid.n) * grid.n) {
    grid.validate();
  }

  static SpectralField from_coefficients(const GridSpec& grid, std::vector<cplx> coeffs,
                                         bool real_valued) {
    SpectralField f(grid, real_valued);
    if (coeffs.size() != f.coeffs_.size()) {
      throw ConfigError("coefficient array has " + std::to_string(coeffs.size()) +
                        " entries, grid needs " + std::to_string(f.coeffs_.size()));
    }
    f.coeffs_ = std::move(coeffs);
    f.enforce_invariants();
    return f;
  }

  static SpectralField constant(const GridSpec& grid, double c) {
    SpectralField f(grid);
    f.coeffs_[0] = c;
    return f;
  }

  /// amplitude * e^{i (k0 x + k1 y)}; a complex-valued field.
  static SpectralField mode(const GridSpec& grid, int k0, int k1, cplx amplitude = 1.0) {
    SpectralField f(grid, false);
    if (std::abs(k0) > grid.k_max() || std::abs(k1) > grid.k_max()) {
      throw DomainError("mode outside the resolved band");
    }
    f.at(k0, k1) = amplitude;
    return f;
  }

  /// amplitude * cos(k0 x + k1 y).
  static SpectralField cosine(const GridSpec& grid, int k0, int k1, double amplitude = 1.0) {
    SpectralField f(grid);
    f.at(k0, k1) += 0.5 * amplitude;
    f.at(-k0, -k1) += 0.5 * amplitude;
    return f;
  }

  /// amplitude * sin(k0 x + k1 y).
  static SpectralField sine(const GridSpec& grid, int k0, int k1, double amplitude = 1.0) {
    SpectralField f(grid);
    f.at(k0, k1) += cplx(0.0, -0.5 * amplitude);
    f.at(-k0, -k1) += cplx(0.0, 0.5 * amplitude);
    return f;
  }

  const GridSpec& grid() const { return grid_; }
  int n() const { return grid_.n; }
  bool is_real() const { return real_; }
  std::size_t size() const { return coeffs_.size(); }

  std::span<const cplx> coeffs() const { return coeffs_; }
  std::span<cplx> coeffs() { return coeffs_; }

  cplx operator()(int k0, int k1) const { return coeffs_[index(k0, k1)]; }
  cplx& at(int k0, int k1) { return coeffs_[index(k0, k1)]; }

  /// Zeroes the unpaired Nyquist row/column and, for real fields, symmetrises.
  void enforce_invariants() {
    const int n = grid_.n;
    if (real_) {
      for (int i0 = 0; i0 < n; ++i0) {
        for (int i1 = 0; i1 < n; ++i1) {
          const int j0 = (n - i0) % n;
          const int j1 = (n - i1) % n;
          const std::size_t a = static_cast<std::size_t>(i0) * n + i1;
          const std::size_t b = static_cast<std::size_t>(j0) * n + j1;
          if (b < a) continue;
          if (b == a) {
            coeffs_[a] = cplx(coeffs_[a].real(), 0.0);
            continue;
          }
          const cplx avg = 0.5 * (coeffs_[a] + std::conj(coeffs_[b]));
          coeffs_[a] = avg;
          coeffs_[b] = std::conj(avg);
        }
      }
    }
    // Last, so Nyquist entries are +0 whatever the symmetrisation produced.
    for (int i = 0; i < n; ++i) {
      coeffs_[static_cast<std::size_t>(n / 2) * n + i] = 0.0;
      coeffs_[static_cast<std::size_t>(i) * n + n / 2] = 0.0;
    }
  }

  /// Real-valued field (f + conj f)/2.
  SpectralField real_part() const {
    if (real_) return *this;
    SpectralField r(grid_);
    const int n = grid_.n;
    for (int i0 = 0; i0 < n; ++i0) {
      for (int i1 = 0; i1 < n; ++i1) {
        const std::size_t a = static_cast<std::size_t>(i0) * n + i1;
        const std::size_t b = static_cast<std::size_t>((n - i0) % n) * n + (n - i1) % n;
        r.coeffs_[a] = 0.5 * (coeffs_[a] + std::conj(coeffs_[b]));
      }
    }
    return r;
  }

  /// Real-valued field (f - conj f)/(2i).
  SpectralField imag_part() const {
    SpectralField r(grid_);
    if (real_) return r;
    const int n = grid_.n;
    for (int i0 = 0; i0 < n; ++i0) {
      for (int i1 = 0; i1 < n; ++i1) {
        const std::size_t a = static_cast<std::size_t>(i0) * n + i1;
        const std::size_t b = static_cast<std::size_t>((n - i0) % n) * n + (n - i1) % n;
        r.coeffs_[a] = (coeffs_[a] - std::conj(coeffs_[b])) / cplx(0.0, 2.0);
      }
    }
    return r;
  }

  /// re + i*im for real-flagged re, im.
  static SpectralField combine(const SpectralField& re, const SpectralField& im) {
    require_same_grid(re, im);
    SpectralField out(re.grid(), false);
    for (std::size_t k = 0; k < out.size(); ++k) out.coeffs_[k] = re.coeffs_[k] + cplx(0, 1) * im.coeffs_[k];
    return out;
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(*this, o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    real_ = real_ && o.real_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(*this, o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    real_ = real_ && o.real_;
    return *this;
  }
  SpectralField& operator*=(double a) {
    for (auto& c : coeffs_) c *= a;
    return *this;
  }
  SpectralField& operator*=(cplx a) {
    for (auto& c : coeffs_) c *= a;
    if (a.imag() != 0.0) real_ = false;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }

  friend void require_same_grid(const SpectralField& a, const SpectralField& b) {
    if (!(a.grid_ == b.grid_)) throw ConfigError("fields live on different grids");
  }

 private:
  std::size_t index(int k0, int k1) const {
    const int n = grid_.n;
    return static_cast<std::size_t>(fft_index(k0, n)) * n + fft_index(k1, n);
  }

  GridSpec grid_{};
  bool real_ = true;
  std::vector<cplx> coeffs_;
};

/// Point values of a real field on an m x m node grid, x_j = 2 pi j / m, row-major.
struct PhysicalField {
  int m = 0;
  std::vector<double> v;

  PhysicalField() = default;
  explicit PhysicalField(int size, double fill = 0.0)
      : m(size), v(static_cast<std::size_t>(size) * size, fill) {}

  std::size_t size() const { return v.size(); }
  double& operator[](std::size_t k) { return v[k]; }
  double operator[](std::size_t k) const { return v[k]; }
};

/// Two-component vector field sharing one grid.
struct VectorField2 {
  std::array<SpectralField, 2> c;

  VectorField2() = default;
  explicit VectorField2(const GridSpec& grid) : c{SpectralField(grid), SpectralField(grid)} {}
  VectorField2(SpectralField a, SpectralField b) : c{std::move(a), std::move(b)} {
    require_same_grid(c[0], c[1]);
  }

  SpectralField& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  const SpectralField& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  const GridSpec& grid() const { return c[0].grid(); }

  VectorField2& operator+=(const VectorField2& o) {
    c[0] += o.c[0];
    c[1] += o.c[1];
    return *this;
  }
  VectorField2& operator-=(const VectorField2& o) {
    c[0] -= o.c[0];
    c[1] -= o.c[1];
    return *this;
  }
  VectorField2& operator*=(double a) {
    c[0] *= a;
    c[1] *= a;
    return *this;
  }
  friend VectorField2 operator+(VectorField2 a, const VectorField2& b) { return a += b; }
  friend VectorField2 operator-(VectorField2 a, const VectorField2& b) { return a -= b; }
  friend VectorField2 operator*(double s, VectorField2 a) { return a *= s; }
};

/// 2 x 2 tensor field, entries (i, j) stored row-major.
struct TensorField22 {
  std::array<SpectralField, 4> c;
  bool symmetric = false;

  TensorField22() = default;
  explicit TensorField22(const GridSpec& grid)
      : c{SpectralField(grid), SpectralField(grid), SpectralField(grid), SpectralField(grid)} {}

  SpectralField& operator()(int i, int j) { return c[static_cast<std::size_t>(2 * i + j)]; }
  const SpectralField& operator()(int i, int j) const { return c[static_cast<std::size_t>(2 * i + j)]; }
  const GridSpec& grid() const { return c[0].grid(); }
};

// ---------------------------------------------------------------------------
// Transforms

namespace detail {

inline void scatter_padded(const SpectralField& f, std::span<cplx> out, int m, cplx weight) {
  const int n = f.n();
  const int kmax = n / 2 - 1;
  auto src = f.coeffs();
  for (int i0 = 0; i0 < n; ++i0) {
    const int k0 = wavenumber(i0, n);
    if (std::abs(k0) > kmax) continue;
    const std::size_t row = static_cast<std::size_t>(fft_index(k0, m)) * m;
    for (int i1 = 0; i1 < n; ++i1) {
      const int k1 = wavenumber(i1, n);
      if (std::abs(k1) > kmax) continue;
      out[row + fft_index(k1, m)] += weight * src[static_cast<std::size_t>(i0) * n + i1];
    }
  }
}

}  // namespace detail

/// Point values on an m x m grid (m >= N); the field must be real.
/// Fields are processed two at a time through one complex transform.
inline std::vector<PhysicalField> to_physical(std::span<const SpectralField* const> fields, int m) {
  std::vector<PhysicalField> out;
  out.reserve(fields.size());
  std::vector<cplx> buf(static_cast<std::size_t>(m) * m);
  for (std::size_t k = 0; k < fields.size(); k += 2) {
    const SpectralField& a = *fields[k];
    const SpectralField* b = k + 1 < fields.size() ? fields[k + 1] : nullptr;
    if (!a.is_real() || (b && !b->is_real())) {
      throw DomainError("to_physical needs real-valued fields; split complex fields first");
    }
    if (m < a.n()) throw ConfigError("physical grid smaller than spectral grid");
    std::fill(buf.begin(), buf.end(), cplx(0.0));
    detail::scatter_padded(a, buf, m, 1.0);
    if (b) {
      require_same_grid(a, *b);
      detail::scatter_padded(*b, buf, m, cplx(0.0, 1.0));
    }
    detail::fft2d(buf, m, FFTW_BACKWARD);
    PhysicalField pa(m);
    for (std::size_t i = 0; i < buf.size(); ++i) pa.v[i] = buf[i].real();
    out.push_back(std::move(pa));
    if (b) {
      PhysicalField pb(m);
      for (std::size_t i = 0; i < buf.size(); ++i) pb.v[i] = buf[i].imag();
      out.push_back(std::move(pb));
    }
  }
  return out;
}

inline PhysicalField to_physical(const SpectralField& f, int m) {
  const SpectralField* p = &f;
  return std::move(to_physical(std::span<const SpectralField* const>(&p, 1), m).front());
}

inline PhysicalField to_physical(const SpectralField& f) { return to_physical(f, f.n()); }

/// Point values on the padded grid used for products.
inline PhysicalField to_padded(const SpectralField& f) { return to_physical(f, f.grid().padded_size()); }

/// Coefficients of real point values, truncated to the band of `grid`.
/// Values on a padded grid are truncated; this is how products are dealiased.
inline std::vector<SpectralField> from_physical(std::span<const PhysicalField* const> values,
                                                const GridSpec& grid) {
  grid.validate();
  std::vector<SpectralField> out;
  out.reserve(values.size());
  const int n = grid.n;
  const int kmax = grid.k_max();
  for (std::size_t k = 0; k < values.size(); k += 2) {
    const PhysicalField& a = *values[k];
    const PhysicalField* b = k + 1 < values.size() ? values[k + 1] : nullptr;
    const int m = a.m;
    if (m < n || (b && b->m != m)) throw ConfigError("physical grid size mismatch");
    std::vector<cplx> buf(static_cast<std::size_t>(m) * m);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = cplx(a.v[i], b ? b->v[i] : 0.0);
    detail::fft2d(buf, m, FFTW_FORWARD);
    const double scale = 1.0 / (static_cast<double>(m) * m);
    SpectralField fa(grid), fb(grid);
    auto ca = fa.coeffs();
    auto cb = fb.coeffs();
    for (int i0 = 0; i0 < n; ++i0) {
      const int k0 = wavenumber(i0, n);
      if (std::abs(k0) > kmax) continue;
      for (int i1 = 0; i1 < n; ++i1) {
        const int k1 = wavenumber(i1, n);
        if (std::abs(k1) > kmax) continue;
        const cplx c = buf[static_cast<std::size_t>(fft_index(k0, m)) * m + fft_index(k1, m)];
        const cplx cm = std::conj(buf[static_cast<std::size_t>(fft_index(-k0, m)) * m + fft_index(-k1, m)]);
        const std::size_t dst = static_cast<std::size_t>(i0) * n + i1;
        ca[dst] = 0.5 * (c + cm) * scale;
        cb[dst] = (c - cm) / cplx(0.0, 2.0) * scale;
      }
    }
    out.push_back(std::move(fa));
    if (b) out.push_back(std::move(fb));
  }
  return out;
}

inline SpectralField from_physical(const PhysicalField& values, const GridSpec& grid) {
  const PhysicalField* p = &values;
  return std::move(from_physical(std::span<const PhysicalField* const>(&p, 1), grid).front());
}

/// Forward transform of samples on the native N x N grid.
inline SpectralField transform_forward(const PhysicalField& samples, const GridSpec& grid) {
  if (samples.m != grid.n) {
    throw ConfigError("sample grid " + std::to_string(samples.m) + " does not match N=" +
                      std::to_string(grid.n));
  }
  return from_physical(samples, grid);
}

/// Inverse transform onto the native N x N grid.
inline PhysicalField transform_inverse(const SpectralField& f) { return to_physical(f, f.n()); }

/// Dealiased product: both factors evaluated on the padded grid, multiplied, truncated.
/// Complex factors are split into real and imaginary parts.
inline SpectralField product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  auto real_product = [](const SpectralField& a, const SpectralField& b) {
    const SpectralField* in[2] = {&a, &b};
    auto p = to_physical(in, a.grid().padded_size());
    for (std::size_t k = 0; k < p[0].size(); ++k) p[0].v[k] *= p[1].v[k];
    return from_physical(p[0], a.grid());
  };
  if (f.is_real() && g.is_real()) return real_product(f, g);
  const SpectralField fr = f.real_part(), fi = f.imag_part();
  const SpectralField gr = g.real_part(), gi = g.imag_part();
  return SpectralField::combine(real_product(fr, gr) - real_product(fi, gi),
                                real_product(fr, gi) + real_product(fi, gr));
}

// ---------------------------------------------------------------------------
// Differential operators

/// Fourier multiplier m(k0, k1) applied coefficientwise. The symbol must satisfy
/// m(-k) = conj(m(k)) for the real flag to stay truthful.
template <class Symbol>
SpectralField apply_symbol(const SpectralField& f, Symbol&& symbol) {
  SpectralField out = f;
  const int n = f.n();
  auto c = out.coeffs();
  for (int i0 = 0; i0 < n; ++i0) {
    const int k0 = wavenumber(i0, n);
    for (int i1 = 0; i1 < n; ++i1) {
      c[static_cast<std::size_t>(i0) * n + i1] *= symbol(k0, wavenumber(i1, n));
    }
  }
  return out;
}

/// (d f / d x_axis)_n = i n_axis f_n.
inline SpectralField derivative(const SpectralField& f, int axis) {
  if (axis != 0 && axis != 1) throw DomainError("axis must be 0 or 1");
  return apply_symbol(f, [axis](int k0, int k1) { return cplx(0.0, axis == 0 ? k0 : k1); });
}

inline SpectralField laplacian(const SpectralField& f) {
  return apply_symbol(f, [](int k0, int k1) { return cplx(-(k0 * k0 + k1 * k1), 0.0); });
}

inline VectorField2 gradient(const SpectralField& f) { return {derivative(f, 0), derivative(f, 1)}; }

inline SpectralField divergence(const VectorField2& u) { return derivative(u[0], 0) + derivative(u[1], 1); }

/// G(i, j) = d u_i / d x_j.
inline TensorField22 vector_gradient(const VectorField2& u) {
  TensorField22 g(u.grid());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) g(i, j) = derivative(u[i], j);
  }
  return g;
}

/// (div T)_i = sum_j d T_ij / d x_j.
inline VectorField2 divergence(const TensorField22& t) {
  return {derivative(t(0, 0), 0) + derivative(t(0, 1), 1), derivative(t(1, 0), 0) + derivative(t(1, 1), 1)};
}

inline VectorField2 laplacian(const VectorField2& u) { return {laplacian(u[0]), laplacian(u[1])}; }

/// L2-orthogonal projection onto divergence-free fields; the mean mode is kept.
inline VectorField2 leray_project(const VectorField2& u) {
  VectorField2 out = u;
  const int n = u.grid().n;
  auto a = out[0].coeffs();
  auto b = out[1].coeffs();
  for (int i0 = 0; i0 < n; ++i0) {
    const double k0 = wavenumber(i0, n);
    for (int i1 = 0; i1 < n; ++i1) {
      const double k1 = wavenumber(i1, n);
      const double kk = k0 * k0 + k1 * k1;
      if (kk == 0.0) continue;
      const std::size_t idx = static_cast<std::size_t>(i0) * n + i1;
      const cplx kdotu = k0 * a[idx] + k1 * b[idx];
      a[idx] -= k0 * kdotu / kk;
      b[idx] -= k1 * kdotu / kk;
    }
  }
  return out;
}

/// max_n |n . u_n|.
inline double divergence_residual(const VectorField2& u) {
  const int n = u.grid().n;
  double worst = 0.0;
  auto a = u[0].coeffs();
  auto b = u[1].coeffs();
  for (int i0 = 0; i0 < n; ++i0) {
    const double k0 = wavenumber(i0, n);
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i0) * n + i1;
      worst = std::max(worst, std::abs(k0 * a[idx] + double(wavenumber(i1, n)) * b[idx]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Norms and integrals

/// Sum_n |f_n|^2 weighted by w(|n|).
template <class Weight>
double weighted_energy(const SpectralField& f, Weight&& w) {
  const int n = f.n();
  auto c = f.coeffs();
  double sum = 0.0;
  for (int i0 = 0; i0 < n; ++i0) {
    const double k0 = wavenumber(i0, n);
    for (int i1 = 0; i1 < n; ++i1) {
      const double k1 = wavenumber(i1, n);
      sum += w(std::sqrt(k0 * k0 + k1 * k1)) * std::norm(c[static_cast<std::size_t>(i0) * n + i1]);
    }
  }
  return sum;
}

/// L2 norm by Parseval: (2 pi) (sum |f_n|^2)^{1/2}.
inline double l2_norm(const SpectralField& f) {
  return two_pi * std::sqrt(weighted_energy(f, [](double) { return 1.0; }));
}

inline double l2_norm(const VectorField2& u) { return std::hypot(l2_norm(u[0]), l2_norm(u[1])); }

/// Real part of the L2 inner product integral f conj(g).
inline double inner_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  double sum = 0.0;
  auto a = f.coeffs();
  auto b = g.coeffs();
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] * std::conj(b[k])).real();
  return torus_area * sum;
}

/// H^s norm with Fourier weight (1+|n|)^{2s}: (2 pi) (sum (1+|n|)^{2s} |f_n|^2)^{1/2}.
inline double hs_norm_fourier(const SpectralField& f, double s) {
  return two_pi * std::sqrt(weighted_energy(f, [s](double k) { return std::pow(1.0 + k, 2.0 * s); }));
}

inline double hs_norm_fourier(const VectorField2& u, double s) {
  return std::hypot(hs_norm_fourier(u[0], s), hs_norm_fourier(u[1], s));
}

/// Integral over the torus by the rectangle rule on the node grid.
inline double integrate(const PhysicalField& p) {
  double sum = 0.0;
  for (double x : p.v) sum += x;
  return sum * torus_area / static_cast<double>(p.size());
}

/// L^p norm on the node grid; p = infinity gives the max modulus.
inline double lp_norm(const PhysicalField& f, double p) {
  if (p < 1.0) throw DomainError("L^p norm needs p >= 1");
  if (std::isinf(p)) {
    double worst = 0.0;
    for (double x : f.v) worst = std::max(worst, std::abs(x));
    return worst;
  }
  double sum = 0.0;
  if (p == 2.0) {
    for (double x : f.v) sum += x * x;
  } else if (p == 1.0) {
    for (double x : f.v) sum += std::abs(x);
  } else {
    for (double x : f.v) sum += std::pow(std::abs(x), p);
  }
  return std::pow(sum * torus_area / static_cast<double>(f.size()), 1.0 / p);
}

/// L^p norm of |v| for a vector field given by its component values.
inline double lp_norm(const PhysicalField& a, const PhysicalField& b, double p) {
  PhysicalField mag(a.m);
  for (std::size_t k = 0; k < a.size(); ++k) mag.v[k] = std::hypot(a.v[k], b.v[k]);
  return lp_norm(mag, p);
}

/// L^p norm of a (possibly complex) field, sampled on its padded grid.
inline double lp_norm(const SpectralField& f, double p) {
  const int m = f.grid().padded_size();
  if (f.is_real()) return lp_norm(to_physical(f, m), p);
  const SpectralField re = f.real_part(), im = f.imag_part();
  const SpectralField* in[2] = {&re, &im};
  auto v = to_physical(in, m);
  return lp_norm(v[0], v[1], p);
}

inline double lp_norm(const VectorField2& u, double p) {
  if (!u[0].is_real() || !u[1].is_real()) throw DomainError("vector L^p norm needs real components");
  const SpectralField* in[2] = {&u[0], &u[1]};
  auto v = to_physical(in, u.grid().padded_size());
  return lp_norm(v[0], v[1], p);
}

}  // namespace lcflow
