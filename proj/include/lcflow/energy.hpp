#pragma once

#include <array>
#include <cmath>

#include "lcflow/ericksen_leslie.hpp"
#include "lcflow/littlewood_paley.hpp"
#include "lcflow/norms.hpp"
#include "lcflow/spectral_field.hpp"

namespace lcflow {

struct EnergyRecord {
  double t = 0.0;
  double e_total = 0.0;
  double e_kinetic = 0.0;
  double e_elastic = 0.0;  // (1/2)|grad d|^2 + W(d)
  double d_total = 0.0;
  std::array<double, 5> d_terms{};
  double div_residual = 0.0;
};

/// integral of W(d) = (|d|^2 - 1)^2 / 4. Exact on the padded grid for band-limited d.
inline double potential_energy(const VectorField2& d) {
  const SpectralField* in[2] = {&d[0], &d[1]};
  auto p = to_physical(in, d.grid().padded_size());
  PhysicalField w(p[0].m);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double s = p[0].v[k] * p[0].v[k] + p[1].v[k] * p[1].v[k] - 1.0;
    w.v[k] = 0.25 * s * s;
  }
  return integrate(w);
}

/// (1/2)||grad f||^2 summed over components, by Parseval.
inline double gradient_energy(const VectorField2& v) {
  auto sq = [](double r) { return r * r; };
  return 0.5 * torus_area * (weighted_energy(v[0], sq) + weighted_energy(v[1], sq));
}

/// Energy part of the record: E = integral of |u|^2/2 + |grad d|^2/2 + W(d).
inline EnergyRecord total_energy(const State& s) {
  EnergyRecord r;
  r.t = s.t;
  const double ul2 = l2_norm(s.u);
  r.e_kinetic = 0.5 * ul2 * ul2;
  r.e_elastic = gradient_energy(s.d) + potential_energy(s.d);
  r.e_total = r.e_kinetic + r.e_elastic;
  const double scale = std::max(ul2, 1e-300);
  r.div_residual = divergence_residual(s.u) / scale;
  return r;
}

/// Dissipation integrals; the five-term form for the ansatz coefficients, the general
/// quadratic form otherwise (or when forced).
inline DissipationTerms total_dissipation(const State& s, const LeslieCoefficients& c,
                                          EvalForm form = EvalForm::automatic) {
  c.validate();
  return *evaluate(s, c, true, form).dissipation;
}

inline EnergyRecord energy_record(const State& s, const DissipationTerms& d) {
  EnergyRecord r = total_energy(s);
  r.d_terms = d.term;
  r.d_total = d.total();
  return r;
}

// ---------------------------------------------------------------------------
// Uniqueness functionals

/// Sum over components of ||grad v_i||^2_{H^s} in LP form.
inline double gradient_hs_sq_lp(const VectorField2& v, double s) {
  const auto& part = DyadicPartition::shared(v.grid());
  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    auto c = v[i].coeffs();
    for (int q = -1; q <= part.q_max(); ++q) {
      auto t = part.delta_table(q);
      auto r = part.radius();
      double acc = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (t[k] != 0.0) acc += t[k] * t[k] * r[k] * r[k] * std::norm(c[k]);
      }
      sum += std::pow(2.0, 2.0 * q * s) * torus_area * acc;
    }
  }
  return sum;
}

inline double hs_sq_lp(const VectorField2& v, double s) {
  const double a = hs_norm_lp(v[0], s), b = hs_norm_lp(v[1], s);
  return a * a + b * b;
}

/// Phi = (||du||^2_{H^{-1/2}} + ||dd||^2_{H^{1/2}}) / 2 with LP-form norms.
inline double phi(const State& s1, const State& s2) {
  require_same_grid(s1.u[0], s2.u[0]);
  const VectorField2 du = s1.u - s2.u;
  const VectorField2 dd = s1.d - s2.d;
  return 0.5 * (hs_sq_lp(du, -0.5) + hs_sq_lp(dd, 0.5));
}

struct FrakD {
  double grad_du = 0.0;  // ||grad du||^2_{H^{-1/2}} (not yet multiplied by nu)
  double grad_dd = 0.0;  // ||grad dd||^2_{H^{1/2}}
  double strain_director = 0.0;  // sum_q 2^-q integral |Delta_q dA S_{q-1} d1|^2
  double strain_dyad = 0.0;      // sum_q 2^-q integral |Delta_q dA : S_{q-1}(d1 x d1)|^2
  double total = 0.0;            // nu grad_du + grad_dd + 2 strain_director + strain_dyad
};

/// The dissipation-rate functional of the difference; d1 comes from the first state.
inline FrakD frak_d(const State& s1, const State& s2, double nu) {
  require_same_grid(s1.u[0], s2.u[0]);
  const GridSpec& grid = s1.grid();
  const auto& part = DyadicPartition::shared(grid);
  const VectorField2 du = s1.u - s2.u;
  const VectorField2 dd = s1.d - s2.d;
  FrakD out;
  out.grad_du = gradient_hs_sq_lp(du, -0.5);
  out.grad_dd = gradient_hs_sq_lp(dd, 0.5);

  const StrainVorticity sv = strain_and_vorticity(du);
  const SpectralField& a00 = sv.a(0, 0);
  const SpectralField& a01 = sv.a(0, 1);
  const SpectralField& a11 = sv.a(1, 1);
  const SpectralField& d0 = s1.d[0];
  const SpectralField& d1 = s1.d[1];
  const SpectralField m00 = product(d0, d0), m01 = product(d0, d1), m11 = product(d1, d1);
  const int m = grid.padded_size();
  for (int q = 0; q <= part.q_max(); ++q) {
    // S_{q-1} vanishes for q <= 0.
    const std::array<SpectralField, 8> f{delta_q(a00, q, part), delta_q(a01, q, part), delta_q(a11, q, part),
                                         s_q(d0, q - 1, part),  s_q(d1, q - 1, part),  s_q(m00, q - 1, part),
                                         s_q(m01, q - 1, part), s_q(m11, q - 1, part)};
    std::array<const SpectralField*, 8> ptr{};
    for (std::size_t k = 0; k < 8; ++k) ptr[k] = &f[k];
    auto p = to_physical(ptr, m);
    PhysicalField vec(m), dyad(m);
    for (std::size_t k = 0; k < vec.size(); ++k) {
      const double x00 = p[0].v[k], x01 = p[1].v[k], x11 = p[2].v[k];
      const double y0 = p[3].v[k], y1 = p[4].v[k];
      const double v0 = x00 * y0 + x01 * y1;
      const double v1 = x01 * y0 + x11 * y1;
      vec.v[k] = v0 * v0 + v1 * v1;
      const double c = x00 * p[5].v[k] + 2.0 * x01 * p[6].v[k] + x11 * p[7].v[k];
      dyad.v[k] = c * c;
    }
    const double w = std::ldexp(1.0, -q);
    out.strain_director += w * integrate(vec);
    out.strain_dyad += w * integrate(dyad);
  }
  out.total = nu * out.grad_du + out.grad_dd + 2.0 * out.strain_director + out.strain_dyad;
  return out;
}

/// Norms of one state entering the bound function (Fourier-form Sobolev norms).
struct StateNorms {
  double u_l2 = 0.0, u_h1 = 0.0, grad_u = 0.0;
  double d_h1 = 0.0, d_h2 = 0.0;
  double ad = 0.0;      // ||A d||_{L^2}
  double d_ad = 0.0;    // ||d . A d||_{L^2}
};

inline StateNorms state_norms(const State& s) {
  StateNorms n;
  n.u_l2 = l2_norm(s.u);
  n.u_h1 = hs_norm_fourier(s.u, 1.0);
  n.grad_u = std::sqrt(2.0 * gradient_energy(s.u));
  n.d_h1 = hs_norm_fourier(s.d, 1.0);
  n.d_h2 = hs_norm_fourier(s.d, 2.0);
  const StrainVorticity sv = strain_and_vorticity(s.u);
  const std::array<const SpectralField*, 5> ptr{&sv.a(0, 0), &sv.a(0, 1), &sv.a(1, 1), &s.d[0], &s.d[1]};
  auto p = to_physical(ptr, s.grid().padded_size());
  PhysicalField ad2(p[0].m), dad2(p[0].m);
  for (std::size_t k = 0; k < ad2.size(); ++k) {
    const double d0 = p[3].v[k], d1 = p[4].v[k];
    const double v0 = p[0].v[k] * d0 + p[1].v[k] * d1;
    const double v1 = p[1].v[k] * d0 + p[2].v[k] * d1;
    ad2.v[k] = v0 * v0 + v1 * v1;
    const double c = d0 * v0 + d1 * v1;
    dad2.v[k] = c * c;
  }
  n.ad = std::sqrt(integrate(ad2));
  n.d_ad = std::sqrt(integrate(dad2));
  return n;
}

struct BoundTerms {
  double f1 = 0.0, f2 = 0.0, f3 = 0.0, g1 = 0.0, g2 = 0.0;
  double total() const { return f1 + f2 + f3 + g1 + g2; }
};

/// The L^1 bound functions with every unnamed constant set to 1.
inline BoundTerms f_bound_terms(const StateNorms& a, const StateNorms& b) {
  auto p = [](double x, int k) { return std::pow(x, k); };
  BoundTerms t;
  t.f1 = (1 + a.u_l2 + b.u_l2) * (p(a.u_h1, 2) + p(b.u_h1, 2)) +
         (1 + a.d_h1 + b.d_h1) * (p(a.d_h2, 2) + p(b.d_h2, 2)) + p(a.d_h1, 6) + p(b.d_h1, 6) + p(b.ad, 2) + 1;
  t.f2 = 1 + p(a.d_h1, 3) + p(b.grad_u, 2) + (1 + p(a.d_h1, 2)) * p(a.d_h2, 2);
  t.f3 = (1 + p(a.u_l2, 2) + p(b.u_l2, 2) + p(a.d_h1, 6)) * (p(a.d_h2, 2) + p(b.d_h2, 2)) +
         (p(a.u_l2, 2) + p(b.u_l2, 2) + p(a.d_h1, 2) + p(b.d_h1, 2)) * (p(a.grad_u, 2) + p(b.grad_u, 2)) + 1;
  const double dsum = p(a.d_h1, 2) + p(b.d_h1, 2);
  t.g1 = p(b.d_ad, 2) * dsum + (a.u_l2 + b.u_l2) * dsum * (a.grad_u + b.grad_u) +
         (dsum + p(a.d_h1, 6) + p(b.d_h1, 6) + p(a.u_l2, 4) + p(b.u_l2, 4)) *
             (p(a.d_h2, 2) + p(a.grad_u, 2) + p(b.grad_u, 2));
  t.g2 = (p(a.d_h1, 2) + p(a.d_h1, 6) + p(a.u_l2, 4) + p(b.u_l2, 4)) *
             (p(a.d_h2, 2) + p(a.grad_u, 2) + p(b.grad_u, 2)) +
         1;
  return t;
}

inline double f_bound(const State& s1, const State& s2) {
  require_same_grid(s1.u[0], s2.u[0]);
  return f_bound_terms(state_norms(s1), state_norms(s2)).total();
}

struct UniquenessRecord {
  double t = 0.0;
  double phi = 0.0;
  double frak_d = 0.0;
  double du_hm12 = 0.0;       // ||du||_{H^{-1/2}}
  double dd_h12 = 0.0;        // ||dd||_{H^{1/2}}
  double grad_du_hm12 = 0.0;  // ||grad du||_{H^{-1/2}}
  double grad_dd_h12 = 0.0;   // ||grad dd||_{H^{1/2}}
  double strain_director = 0.0;
  double strain_dyad = 0.0;
  double f_hat = 0.0;
};

inline UniquenessRecord uniqueness_record(const State& s1, const State& s2, double nu) {
  UniquenessRecord r;
  r.t = s1.t;
  const VectorField2 du = s1.u - s2.u;
  const VectorField2 dd = s1.d - s2.d;
  const double a = hs_sq_lp(du, -0.5), b = hs_sq_lp(dd, 0.5);
  r.phi = 0.5 * (a + b);
  r.du_hm12 = std::sqrt(a);
  r.dd_h12 = std::sqrt(b);
  const FrakD fd = frak_d(s1, s2, nu);
  r.frak_d = fd.total;
  r.grad_du_hm12 = std::sqrt(fd.grad_du);
  r.grad_dd_h12 = std::sqrt(fd.grad_dd);
  r.strain_director = fd.strain_director;
  r.strain_dyad = fd.strain_dyad;
  r.f_hat = f_bound(s1, s2);
  return r;
}

}  // namespace lcflow
