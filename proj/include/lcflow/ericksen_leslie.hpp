#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lcflow/errors.hpp"
#include "lcflow/spectral_field.hpp"

namespace lcflow {

/// Leslie viscosities. The mu4 A part of the stress is the Newtonian term nu Lap u,
/// so mu4 must equal 2 nu; the remaining stress is assembled explicitly.
struct LeslieCoefficients {
  std::array<double, 6> mu{1.0, -1.0, 0.0, 2.0, 3.0, 1.0};
  double lambda1 = -1.0;
  double lambda2 = 2.0;
  double nu = 1.0;

  /// mu1..mu6 = 1, -1, 0, 2 nu, 3, 1 (lambda1 = -1, lambda2 = 2).
  static LeslieCoefficients ansatz(double nu) {
    LeslieCoefficients c;
    c.mu = {1.0, -1.0, 0.0, 2.0 * nu, 3.0, 1.0};
    c.lambda1 = -1.0;
    c.lambda2 = 2.0;
    c.nu = nu;
    return c;
  }

  /// General coefficients, lambdas derived from the compatibility relations.
  static LeslieCoefficients general(const std::array<double, 6>& mu, double nu) {
    LeslieCoefficients c;
    c.mu = mu;
    c.lambda1 = mu[1] - mu[2];
    c.lambda2 = mu[4] - mu[5];
    c.nu = nu;
    return c;
  }

  double m(int i) const { return mu[static_cast<std::size_t>(i - 1)]; }

  bool satisfies_parodi(double tol = 1e-12) const { return std::abs(m(2) + m(3) - (m(6) - m(5))) <= tol; }

  bool is_ansatz() const {
    const auto a = ansatz(nu);
    return mu == a.mu && lambda1 == a.lambda1 && lambda2 == a.lambda2;
  }

  /// Throws ConfigError naming the first violated condition.
  void validate() const {
    auto fail = [](const std::string& why) { throw ConfigError("Leslie coefficients: " + why); };
    for (double x : mu) {
      if (!std::isfinite(x)) fail("non-finite mu");
    }
    if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || !std::isfinite(nu)) fail("non-finite value");
    if (!(nu > 0.0)) fail("nu must be positive");
    const double tol = 1e-12 * (1.0 + std::abs(lambda1) + std::abs(lambda2));
    if (std::abs(lambda1 - (m(2) - m(3))) > tol) fail("lambda1 != mu2 - mu3");
    if (std::abs(lambda2 - (m(5) - m(6))) > tol) fail("lambda2 != mu5 - mu6");
    if (!(lambda1 < 0.0)) fail("lambda1 must be negative");
    if (!(m(1) >= 0.0)) fail("mu1 must be >= 0");
    if (!(m(4) > 0.0)) fail("mu4 must be positive");
    if (!(m(5) + m(6) >= 0.0)) fail("mu5 + mu6 must be >= 0");
    if (satisfies_parodi()) {
      if (lambda2 != 0.0 && !(lambda2 * lambda2 / (-lambda1) < m(5) + m(6))) {
        fail("Parodi branch needs lambda2^2 / (-lambda1) < mu5 + mu6");
      }
    } else if (!(std::abs(lambda2 - m(2) - m(3)) < 2.0 * std::sqrt(-lambda1) * std::sqrt(m(5) + m(6)))) {
      fail("|lambda2 - mu2 - mu3| < 2 sqrt(-lambda1) sqrt(mu5 + mu6) violated");
    }
    if (std::abs(m(4) - 2.0 * nu) > 1e-12 * m(4)) fail("mu4 must equal 2 nu");
  }

  /// Diffusion coefficient of the director equation, -1/lambda1.
  double director_diffusivity() const { return -1.0 / lambda1; }
};

/// Velocity u (solenoidal, zero mean) and planar director d at time t.
struct State {
  VectorField2 u;
  VectorField2 d;
  double t = 0.0;

  const GridSpec& grid() const { return u.grid(); }

  static State rest(const GridSpec& grid, double d0 = 1.0, double d1 = 0.0) {
    State s{VectorField2(grid), VectorField2(grid), 0.0};
    s.d[0] = SpectralField::constant(grid, d0);
    s.d[1] = SpectralField::constant(grid, d1);
    return s;
  }
};

enum class Scheme { if_euler, if_rk2 };

inline Scheme parse_scheme(const std::string& s) {
  if (s == "euler" || s == "if_euler" || s == "1") return Scheme::if_euler;
  if (s == "rk2" || s == "if_rk2" || s == "2") return Scheme::if_rk2;
  throw ConfigError("unknown time scheme '" + s + "'");
}

inline std::string to_string(Scheme s) { return s == Scheme::if_euler ? "euler" : "rk2"; }

struct SolverConfig {
  GridSpec grid{};
  double dt = 1e-3;
  double t_end = 1.0;
  LeslieCoefficients coefficients = LeslieCoefficients::ansatz(1.0);
  Scheme scheme = Scheme::if_euler;
  int energy_cadence = 1;
  int uniqueness_cadence = 10;
  int snapshot_cadence = 0;  // 0: no snapshots

  void validate() const {
    grid.validate();
    coefficients.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be >= 0");
    if (energy_cadence < 1 || uniqueness_cadence < 1) throw ConfigError("cadence must be >= 1 step");
    if (snapshot_cadence < 0) throw ConfigError("snapshot cadence must be >= 0");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }
};

/// A = (G + G^t)/2 and omega = (G - G^t)/2 for G(i, j) = d u_i / d x_j.
struct StrainVorticity {
  TensorField22 a;
  TensorField22 omega;
};

inline StrainVorticity strain_and_vorticity(const VectorField2& u) {
  const TensorField22 g = vector_gradient(u);
  StrainVorticity out{TensorField22(u.grid()), TensorField22(u.grid())};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out.a(i, j) = 0.5 * (g(i, j) + g(j, i));
      out.omega(i, j) = 0.5 * (g(i, j) - g(j, i));
    }
  }
  out.a(1, 0) = out.a(0, 1);
  out.a.symmetric = true;
  return out;
}

/// The five dissipation integrals (ansatz form) or, for general coefficients,
/// the five terms mu1|d.Ad|^2, (mu4/2)|grad u|^2, (mu5+mu6)|Ad|^2, -lambda1|N|^2,
/// -(lambda2-mu2-mu3) N.Ad.
struct DissipationTerms {
  std::array<double, 5> term{};
  bool general = false;

  double total() const { return term[0] + term[1] + term[2] + term[3] + term[4]; }
};

/// Explicit tendencies: velocity as a divergence of a stress (not yet projected,
/// without nu Lap u), director without its diffusion.
struct Evaluation {
  VectorField2 du;
  VectorField2 dd;
  std::optional<DissipationTerms> dissipation;
  TensorField22 stress;  // filled only on request
};

enum class EvalForm { automatic, ansatz, general };

namespace detail {

// Indices into the padded physical arrays.
enum Slot { U0, U1, D0, D1, G00, G01, G10, G11, DD00, DD01, DD10, DD11, L0, L1, n_slots };

struct PointValues {
  std::vector<PhysicalField> v;
  const PhysicalField& operator[](Slot s) const { return v[s]; }
};

inline PointValues sample_state(const State& s) {
  const SpectralField* none = nullptr;
  std::array<SpectralField, 10> derived{
      derivative(s.u[0], 0), derivative(s.u[0], 1), derivative(s.u[1], 0), derivative(s.u[1], 1),
      derivative(s.d[0], 0), derivative(s.d[0], 1), derivative(s.d[1], 0), derivative(s.d[1], 1),
      laplacian(s.d[0]),     laplacian(s.d[1])};
  std::array<const SpectralField*, n_slots> ptr{&s.u[0], &s.u[1], &s.d[0], &s.d[1], none, none, none,
                                               none,     none,     none,     none,     none, none, none};
  for (std::size_t k = 0; k < derived.size(); ++k) ptr[4 + k] = &derived[k];
  return {to_physical(ptr, s.grid().padded_size())};
}

}  // namespace detail

/// One pass over the padded grid: all stresses, the director tendency and, on
/// request, the dissipation integrals and the Leslie stress itself.
inline Evaluation evaluate(const State& s, const LeslieCoefficients& c, bool with_dissipation,
                           EvalForm form = EvalForm::automatic, bool keep_stress = false) {
  using namespace detail;
  const GridSpec& grid = s.grid();
  const bool ansatz = form == EvalForm::ansatz || (form == EvalForm::automatic && c.is_ansatz());
  const PointValues pv = sample_state(s);
  const int m = grid.padded_size();
  const std::size_t np = static_cast<std::size_t>(m) * m;

  // Momentum flux -u(x)u - grad d (.) grad d + sigma, and director tendency.
  std::array<PhysicalField, 6> out;
  for (auto& f : out) f = PhysicalField(m);
  std::array<PhysicalField, 4> sig;
  if (keep_stress) {
    for (auto& f : sig) f = PhysicalField(m);
  }
  std::array<double, 5> diss{};

  const double mu1 = c.m(1), mu2 = c.m(2), mu3 = c.m(3), mu5 = c.m(5), mu6 = c.m(6);
  const double l1 = c.lambda1, l2 = c.lambda2;
  const double gen_b = -(l2 - mu2 - mu3);

  for (std::size_t k = 0; k < np; ++k) {
    const double u0 = pv[U0][k], u1 = pv[U1][k];
    const double d0 = pv[D0][k], d1 = pv[D1][k];
    const double g00 = pv[G00][k], g01 = pv[G01][k], g10 = pv[G10][k], g11 = pv[G11][k];
    const double e00 = pv[DD00][k], e01 = pv[DD01][k], e10 = pv[DD10][k], e11 = pv[DD11][k];

    const double w = d0 * d0 + d1 * d1 - 1.0;
    const double wp0 = w * d0, wp1 = w * d1;
    const double h0 = pv[L0][k] - wp0, h1 = pv[L1][k] - wp1;
    const double a01 = 0.5 * (g01 + g10);
    const double ad0 = g00 * d0 + a01 * d1;
    const double ad1 = a01 * d0 + g11 * d1;
    const double dad = d0 * ad0 + d1 * ad1;

    double s00, s01, s10, s11, r0, r1;
    if (ansatz) {
      s00 = d0 * d0 * dad + 2.0 * d0 * ad0 - h0 * d0;
      s01 = d0 * d1 * dad + d0 * ad1 + ad0 * d1 - h0 * d1;
      s10 = d1 * d0 * dad + d1 * ad0 + ad1 * d0 - h1 * d0;
      s11 = d1 * d1 * dad + 2.0 * d1 * ad1 - h1 * d1;
      // (3/2) G d + (1/2) G^t d - W'(d)
      r0 = 1.5 * (g00 * d0 + g01 * d1) + 0.5 * (g00 * d0 + g10 * d1) - wp0;
      r1 = 1.5 * (g10 * d0 + g11 * d1) + 0.5 * (g01 * d0 + g11 * d1) - wp1;
      if (with_dissipation) {
        diss[1] += dad * dad;
        diss[2] += 1.5 * (ad0 * ad0 + ad1 * ad1);
        diss[3] += 0.5 * (h0 * h0 + h1 * h1);
        diss[4] += 0.5 * ((ad0 + h0) * (ad0 + h0) + (ad1 + h1) * (ad1 + h1));
      }
    } else {
      const double n0 = -(l2 * ad0 + h0) / l1;
      const double n1 = -(l2 * ad1 + h1) / l1;
      s00 = mu1 * d0 * d0 * dad + mu2 * n0 * d0 + mu3 * d0 * n0 + mu5 * ad0 * d0 + mu6 * d0 * ad0;
      s01 = mu1 * d0 * d1 * dad + mu2 * n0 * d1 + mu3 * d0 * n1 + mu5 * ad0 * d1 + mu6 * d0 * ad1;
      s10 = mu1 * d1 * d0 * dad + mu2 * n1 * d0 + mu3 * d1 * n0 + mu5 * ad1 * d0 + mu6 * d1 * ad0;
      s11 = mu1 * d1 * d1 * dad + mu2 * n1 * d1 + mu3 * d1 * n1 + mu5 * ad1 * d1 + mu6 * d1 * ad1;
      // omega d - (lambda2/lambda1) A d + W'(d)/lambda1; the Lap d / (-lambda1) part is implicit.
      const double om01 = 0.5 * (g01 - g10);
      r0 = om01 * d1 - (l2 / l1) * ad0 + wp0 / l1;
      r1 = -om01 * d0 - (l2 / l1) * ad1 + wp1 / l1;
      if (with_dissipation) {
        diss[1] += mu1 * dad * dad;
        diss[2] += (mu5 + mu6) * (ad0 * ad0 + ad1 * ad1);
        diss[3] += -l1 * (n0 * n0 + n1 * n1);
        diss[4] += gen_b * (n0 * ad0 + n1 * ad1);
      }
    }
    if (keep_stress) {
      sig[0].v[k] = s00;
      sig[1].v[k] = s01;
      sig[2].v[k] = s10;
      sig[3].v[k] = s11;
    }
    // Ericksen stress E_ij = sum_k d_i d_k d_j d_k with grad d(k, j) = e_kj.
    const double er00 = e00 * e00 + e10 * e10;
    const double er01 = e00 * e01 + e10 * e11;
    const double er11 = e01 * e01 + e11 * e11;
    out[0].v[k] = -u0 * u0 - er00 + s00;
    out[1].v[k] = -u0 * u1 - er01 + s01;
    out[2].v[k] = -u1 * u0 - er01 + s10;
    out[3].v[k] = -u1 * u1 - er11 + s11;
    out[4].v[k] = -(u0 * e00 + u1 * e01) + r0;
    out[5].v[k] = -(u0 * e10 + u1 * e11) + r1;
  }

  std::array<const PhysicalField*, 6> ptr{&out[0], &out[1], &out[2], &out[3], &out[4], &out[5]};
  auto spec = from_physical(ptr, grid);
  Evaluation ev;
  ev.du = VectorField2(derivative(spec[0], 0) + derivative(spec[1], 1), derivative(spec[2], 0) + derivative(spec[3], 1));
  ev.dd = VectorField2(std::move(spec[4]), std::move(spec[5]));
  if (keep_stress) {
    std::array<const PhysicalField*, 4> sp{&sig[0], &sig[1], &sig[2], &sig[3]};
    auto st = from_physical(sp, grid);
    ev.stress = TensorField22(grid);
    for (std::size_t i = 0; i < 4; ++i) ev.stress.c[i] = std::move(st[i]);
  }
  if (with_dissipation) {
    DissipationTerms d;
    d.general = !ansatz;
    const double cell = torus_area / static_cast<double>(np);
    const double visc = ansatz ? c.nu : 0.5 * c.m(4);
    auto grad_sq = [](double r) { return r * r; };
    d.term[0] = visc * torus_area * (weighted_energy(s.u[0], grad_sq) + weighted_energy(s.u[1], grad_sq));
    for (int t = 1; t < 5; ++t) d.term[static_cast<std::size_t>(t)] = diss[static_cast<std::size_t>(t)] * cell;
    ev.dissipation = d;
  }
  return ev;
}

/// Leslie stress sigma (ansatz) or the general stress without its mu4 A part.
inline TensorField22 leslie_stress(const State& s, const LeslieCoefficients& c, EvalForm form = EvalForm::automatic) {
  c.validate();
  return evaluate(s, c, false, form, true).stress;
}

/// grad_d W = (|d|^2 - 1) d on the padded grid.
inline VectorField2 gl_gradient(const VectorField2& d) {
  const SpectralField* in[2] = {&d[0], &d[1]};
  auto p = to_physical(in, d.grid().padded_size());
  for (std::size_t k = 0; k < p[0].size(); ++k) {
    const double w = p[0].v[k] * p[0].v[k] + p[1].v[k] * p[1].v[k] - 1.0;
    p[0].v[k] *= w;
    p[1].v[k] *= w;
  }
  const PhysicalField* out[2] = {&p[0], &p[1]};
  auto spec = from_physical(out, d.grid());
  return {std::move(spec[0]), std::move(spec[1])};
}

/// Full right-hand sides: velocity before projection (including nu Lap u) and director.
struct Rhs {
  VectorField2 du;
  VectorField2 dd;
};

inline Rhs rhs(const State& s, const LeslieCoefficients& c, EvalForm form = EvalForm::automatic) {
  c.validate();
  Evaluation ev = evaluate(s, c, false, form);
  const double kappa = c.director_diffusivity();
  Rhs r{ev.du + c.nu * laplacian(s.u), ev.dd + kappa * laplacian(s.d)};
  return r;
}

/// Integrating-factor time stepper. Diffusion is integrated exactly per mode; all
/// other terms are explicit (Euler or Heun).
class Integrator {
 public:
  explicit Integrator(const SolverConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    const int n = cfg.grid.n;
    const double nu = cfg.coefficients.nu;
    const double kappa = cfg.coefficients.director_diffusivity();
    eu_.resize(static_cast<std::size_t>(n) * n);
    ed_.resize(eu_.size());
    for (int i0 = 0; i0 < n; ++i0) {
      for (int i1 = 0; i1 < n; ++i1) {
        const double k0 = wavenumber(i0, n), k1 = wavenumber(i1, n);
        const double kk = k0 * k0 + k1 * k1;
        eu_[static_cast<std::size_t>(i0) * n + i1] = std::exp(-nu * kk * cfg.dt);
        ed_[static_cast<std::size_t>(i0) * n + i1] = std::exp(-kappa * kk * cfg.dt);
      }
    }
  }

  const SolverConfig& config() const { return cfg_; }

  /// Advances by dt. If `dissipation` is given it receives the dissipation
  /// integrals of the incoming state (free: same evaluation as the first stage).
  State advance(const State& s, std::size_t step_index, DissipationTerms* dissipation = nullptr) const {
    const auto& c = cfg_.coefficients;
    const double dt = cfg_.dt;
    Evaluation e0 = evaluate(s, c, dissipation != nullptr);
    if (dissipation) *dissipation = *e0.dissipation;
    State out;
    out.t = s.t + dt;
    if (cfg_.scheme == Scheme::if_euler) {
      out.u = propagate_u(s.u + dt * e0.du);
      out.d = propagate_d(s.d + dt * e0.dd);
    } else {
      State a;
      a.t = s.t + dt;
      a.u = propagate_u(s.u + dt * e0.du);
      a.d = propagate_d(s.d + dt * e0.dd);
      Evaluation e1 = evaluate(a, c, false);
      out.u = propagate_u(s.u + 0.5 * dt * e0.du) + 0.5 * dt * leray_project(e1.du);
      out.d = propagate_d(s.d + 0.5 * dt * e0.dd) + 0.5 * dt * e1.dd;
    }
    check_finite(out, step_index);
    return out;
  }

 private:
  VectorField2 propagate_u(const VectorField2& v) const {
    VectorField2 p = leray_project(v);
    for (int i = 0; i < 2; ++i) {
      auto cf = p[i].coeffs();
      for (std::size_t k = 0; k < cf.size(); ++k) cf[k] *= eu_[k];
      cf[0] = 0.0;
    }
    return p;
  }
  VectorField2 propagate_d(VectorField2 v) const {
    for (int i = 0; i < 2; ++i) {
      auto cf = v[i].coeffs();
      for (std::size_t k = 0; k < cf.size(); ++k) cf[k] *= ed_[k];
    }
    return v;
  }
  static void check_finite(const State& s, std::size_t step) {
    for (const auto* f : {&s.u[0], &s.u[1], &s.d[0], &s.d[1]}) {
      for (const auto& z : f->coeffs()) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
          throw DivergenceError(step, "non-finite Fourier coefficient");
        }
      }
    }
  }

  SolverConfig cfg_;
  std::vector<double> eu_, ed_;
};

inline State step(const State& s, const SolverConfig& cfg, std::size_t step_index = 0) {
  return Integrator(cfg).advance(s, step_index);
}

/// Mean-zero pressure from div(momentum) = Lap p, with the momentum right side
/// taken before projection. Diagnostic only.
inline SpectralField recover_pressure(const State& s, const LeslieCoefficients& c) {
  const Evaluation ev = evaluate(s, c, false);
  const SpectralField div = divergence(ev.du);
  return apply_symbol(div, [](int k0, int k1) {
    const int kk = k0 * k0 + k1 * k1;
    return kk == 0 ? cplx(0.0) : cplx(-1.0 / kk, 0.0);
  });
}

}  // namespace lcflow
