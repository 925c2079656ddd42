#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lcflow/energy.hpp"
#include "lcflow/ericksen_leslie.hpp"
#include "lcflow/random_field.hpp"
#include "lcflow/run.hpp"

using namespace lcflow;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs(const SpectralField& f) {
  double m = 0.0;
  for (const auto& z : f.coeffs()) m = std::max(m, std::abs(z));
  return m;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) { return max_abs(a - b); }

// A state whose components only carry modes with |k0|, |k1| <= 2.
State band_limited_state(const GridSpec& g, Rng& rng) {
  State s;
  s.u = random_solenoidal(g, rng, 0.0, 2.0);
  s.d = VectorField2(SpectralField::constant(g, 0.8), SpectralField::constant(g, 0.3)) +
        0.4 * random_vector_field(g, rng, 0.0, 2.0);
  return s;
}

// Pointwise values of a band-limited field and its gradient by direct summation.
struct Pointwise {
  double v, dx, dy, lap;
};

Pointwise evaluate_modes(const SpectralField& f, double x, double y) {
  Pointwise p{0, 0, 0, 0};
  const int n = f.n();
  for (int i0 = 0; i0 < n; ++i0) {
    for (int i1 = 0; i1 < n; ++i1) {
      const cplx c = f.coeffs()[static_cast<std::size_t>(i0) * n + i1];
      if (c == cplx(0.0)) continue;
      const int k0 = wavenumber(i0, n), k1 = wavenumber(i1, n);
      const cplx e = c * std::polar(1.0, k0 * x + k1 * y);
      p.v += e.real();
      p.dx += (cplx(0, k0) * e).real();
      p.dy += (cplx(0, k1) * e).real();
      p.lap += -(k0 * k0 + k1 * k1) * e.real();
    }
  }
  return p;
}

using Mat = std::array<std::array<double, 2>, 2>;
using Vec = std::array<double, 2>;

// sigma = d (x) d (d . A d) + d (x) A d + A d (x) d - h (x) d, h = Lap d - (|d|^2 - 1) d.
Mat ansatz_stress_oracle(const Mat& grad_u, const Vec& d, const Vec& lap_d) {
  Mat a{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) a[i][j] = 0.5 * (grad_u[i][j] + grad_u[j][i]);
  }
  Vec ad{a[0][0] * d[0] + a[0][1] * d[1], a[1][0] * d[0] + a[1][1] * d[1]};
  const double dad = d[0] * ad[0] + d[1] * ad[1];
  const double w = d[0] * d[0] + d[1] * d[1] - 1.0;
  Vec h{lap_d[0] - w * d[0], lap_d[1] - w * d[1]};
  Mat s{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) s[i][j] = d[i] * d[j] * dad + d[i] * ad[j] + ad[i] * d[j] - h[i] * d[j];
  }
  return s;
}

}  // namespace

TEST(Coefficients, AnsatzValues) {
  const auto c = LeslieCoefficients::ansatz(0.5);
  EXPECT_EQ(c.m(1), 1.0);
  EXPECT_EQ(c.m(2), -1.0);
  EXPECT_EQ(c.m(3), 0.0);
  EXPECT_EQ(c.m(4), 1.0);
  EXPECT_EQ(c.m(5), 3.0);
  EXPECT_EQ(c.m(6), 1.0);
  EXPECT_EQ(c.lambda1, -1.0);
  EXPECT_EQ(c.lambda2, 2.0);
  // mu2 + mu3 = -1 but mu6 - mu5 = -2: admissible through the non-Parodi bound |3| < 2 sqrt(1) sqrt(4).
  EXPECT_FALSE(c.satisfies_parodi());
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.director_diffusivity(), 1.0);
}

TEST(Coefficients, InvariantViolationsAreConfigErrors) {
  // lambda1 = mu2 - mu3 must be negative.
  EXPECT_THROW(LeslieCoefficients::general({1, 1, 0, 2, 3, 1}, 1.0).validate(), ConfigError);
  // mu4 carries the viscosity.
  EXPECT_THROW(LeslieCoefficients::general({1, -1, 0, 3, 3, 1}, 1.0).validate(), ConfigError);
  // Parodi holds but lambda2^2 / (-lambda1) = mu5 + mu6.
  EXPECT_THROW(LeslieCoefficients::general({1, -1, 0, 2, 1, 0}, 1.0).validate(), ConfigError);
  EXPECT_THROW(LeslieCoefficients::general({-1, -1, 0, 2, 3, 1}, 1.0).validate(), ConfigError);
  auto bad = LeslieCoefficients::ansatz(1.0);
  bad.lambda2 = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  // Off Parodi, inside the alternative bound: |1.7 + 1.3| < 2 sqrt(1.7) sqrt(2.3).
  EXPECT_NO_THROW(LeslieCoefficients::general({0.5, -1.5, 0.2, 2, 2.0, 0.3}, 1.0).validate());
  EXPECT_THROW(parse_scheme("rk4"), ConfigError);
}

TEST(StrainVorticity, Examples) {
  const GridSpec g{32};
  auto zero = strain_and_vorticity(VectorField2(g));
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(max_abs(zero.a.c[k]), 0.0);
    EXPECT_EQ(max_abs(zero.omega.c[k]), 0.0);
  }
  auto shear = strain_and_vorticity(VectorField2(SpectralField::sine(g, 0, 1), SpectralField(g)));
  const auto half_cos_y = SpectralField::cosine(g, 0, 1, 0.5);
  EXPECT_LT(max_abs_diff(shear.a(0, 1), half_cos_y), 1e-16);
  EXPECT_LT(max_abs_diff(shear.a(1, 0), half_cos_y), 1e-16);
  EXPECT_LT(max_abs_diff(shear.omega(0, 1), half_cos_y), 1e-16);
  EXPECT_LT(max_abs_diff(shear.omega(1, 0), -1.0 * half_cos_y), 1e-16);
  EXPECT_EQ(max_abs(shear.a(0, 0)), 0.0);

  auto rot = strain_and_vorticity(VectorField2(-1.0 * SpectralField::sine(g, 0, 1), SpectralField::sine(g, 1, 0)));
  auto expect = SpectralField::cosine(g, 1, 0, 0.5) - SpectralField::cosine(g, 0, 1, 0.5);
  EXPECT_LT(max_abs_diff(rot.a(0, 1), expect), 1e-16);
}

TEST(StrainVorticity, SymmetricSkewAndSumToGradient) {
  const GridSpec g{32};
  Rng rng(4);
  auto u = random_vector_field(g, rng, 1.0);
  auto sv = strain_and_vorticity(u);
  auto grad = vector_gradient(u);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_EQ(max_abs_diff(sv.a(i, j), sv.a(j, i)), 0.0);
      EXPECT_EQ(max_abs(sv.omega(i, j) + sv.omega(j, i)), 0.0);
      EXPECT_LT(max_abs_diff(sv.a(i, j) + sv.omega(i, j), grad(i, j)), 1e-15 * max_abs(grad(i, j)) + 1e-300);
    }
  }
}

TEST(GlGradient, Examples) {
  const GridSpec g{16};
  EXPECT_EQ(max_abs(gl_gradient(VectorField2(g))[0]), 0.0);
  auto unit = gl_gradient(State::rest(g).d);
  EXPECT_LT(max_abs(unit[0]) + max_abs(unit[1]), 1e-15);
  auto two = gl_gradient(State::rest(g, 2.0, 0.0).d);
  EXPECT_NEAR(two[0](0, 0).real(), 6.0, 1e-14);
  EXPECT_LT(max_abs(two[1]), 1e-15);
}

TEST(LeslieStress, ConstantDirector) {
  const GridSpec g{16};
  const auto c = LeslieCoefficients::ansatz(1.0);
  auto zero = leslie_stress(State{VectorField2(g), VectorField2(g), 0.0}, c);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(max_abs(zero.c[k]), 0.0);
  auto s = leslie_stress(State::rest(g, 2.0, 0.0), c);
  EXPECT_NEAR(s(0, 0)(0, 0).real(), 12.0, 1e-13);
  EXPECT_LT(max_abs(s(0, 1)) + max_abs(s(1, 0)) + max_abs(s(1, 1)), 1e-14);
}

TEST(LeslieStress, MatchesPointwiseOracle) {
  // Factors carry |k| <= 2 per axis, so the quintic stress lives below |k| = 10 and
  // the N = 32 grid holds it without truncation.
  const GridSpec g{32};
  Rng rng(21);
  const auto c = LeslieCoefficients::ansatz(1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const State s = band_limited_state(g, rng);
    const TensorField22 sigma = leslie_stress(s, c);
    std::array<PhysicalField, 4> nodes;
    for (int k = 0; k < 4; ++k) nodes[k] = transform_inverse(sigma.c[k]);
    double worst = 0.0, scale = 0.0;
    for (int j0 = 0; j0 < g.n; ++j0) {
      for (int j1 = 0; j1 < g.n; ++j1) {
        const double x = 2 * pi * j0 / g.n, y = 2 * pi * j1 / g.n;
        const Pointwise u0 = evaluate_modes(s.u[0], x, y), u1 = evaluate_modes(s.u[1], x, y);
        const Pointwise d0 = evaluate_modes(s.d[0], x, y), d1 = evaluate_modes(s.d[1], x, y);
        const Mat grad_u{{{u0.dx, u0.dy}, {u1.dx, u1.dy}}};
        const Mat ref = ansatz_stress_oracle(grad_u, {d0.v, d1.v}, {d0.lap, d1.lap});
        const std::size_t idx = static_cast<std::size_t>(j0) * g.n + j1;
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            worst = std::max(worst, std::abs(nodes[2 * i + j].v[idx] - ref[i][j]));
            scale = std::max(scale, std::abs(ref[i][j]));
          }
        }
      }
    }
    EXPECT_LT(worst, 1e-10 * scale) << "trial " << trial;
  }
}

TEST(Rhs, SteadyAndUniformDirector) {
  const GridSpec g{16};
  const auto c = LeslieCoefficients::ansatz(1.0);
  auto steady = rhs(State::rest(g, 0.6, 0.8), c);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(max_abs(steady.du[i]), 1e-15);
    EXPECT_LT(max_abs(steady.dd[i]), 1e-15);
  }
  const double r = 1.7;
  auto uni = rhs(State::rest(g, r, 0.0), c);
  EXPECT_NEAR(uni.dd[0](0, 0).real(), -(r * r - 1.0) * r, 1e-13);
  EXPECT_LT(max_abs(uni.dd[1]), 1e-15);
  EXPECT_LT(max_abs(leray_project(uni.du)[0]) + max_abs(leray_project(uni.du)[1]), 1e-15);
}

TEST(Rhs, CorotationalIdentityUnderAnsatz) {
  // (3/2) G d + (1/2) G^t d = omega d + 2 A d, pointwise.
  const GridSpec g{32};
  Rng rng(9);
  VectorField2 u = random_solenoidal(g, rng, 1.0);
  VectorField2 d = random_vector_field(g, rng, 1.5);
  const TensorField22 gu = vector_gradient(u);
  const StrainVorticity sv = strain_and_vorticity(u);
  std::vector<const SpectralField*> in{&gu(0, 0), &gu(0, 1), &gu(1, 0), &gu(1, 1), &sv.a(0, 1), &sv.omega(0, 1),
                                       &d[0],     &d[1]};
  auto v = to_physical(std::span<const SpectralField* const>(in), g.padded_size());
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < v[0].size(); ++k) {
    const double g00 = v[0].v[k], g01 = v[1].v[k], g10 = v[2].v[k], g11 = v[3].v[k];
    const double a01 = v[4].v[k], w01 = v[5].v[k], d0 = v[6].v[k], d1 = v[7].v[k];
    const double lhs0 = 1.5 * (g00 * d0 + g01 * d1) + 0.5 * (g00 * d0 + g10 * d1);
    const double lhs1 = 1.5 * (g10 * d0 + g11 * d1) + 0.5 * (g01 * d0 + g11 * d1);
    const double rhs0 = w01 * d1 + 2.0 * (g00 * d0 + a01 * d1);
    const double rhs1 = -w01 * d0 + 2.0 * (a01 * d0 + g11 * d1);
    worst = std::max({worst, std::abs(lhs0 - rhs0), std::abs(lhs1 - rhs1)});
    scale = std::max({scale, std::abs(lhs0), std::abs(lhs1)});
  }
  EXPECT_LT(worst, 1e-12 * scale);
}

TEST(Rhs, GeneralPathReducesToAnsatz) {
  const GridSpec g{32};
  Rng rng(13);
  const auto c = LeslieCoefficients::ansatz(0.7);
  State s{random_solenoidal(g, rng, 2.0), random_vector_field(g, rng, 2.0), 0.0};
  auto a = evaluate(s, c, true, EvalForm::ansatz, true);
  auto b = evaluate(s, c, true, EvalForm::general, true);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(max_abs_diff(a.du[i], b.du[i]), 1e-12 * max_abs(a.du[i]));
    EXPECT_LT(max_abs_diff(a.dd[i], b.dd[i]), 1e-12 * max_abs(a.dd[i]));
  }
  for (int k = 0; k < 4; ++k) EXPECT_LT(max_abs_diff(a.stress.c[k], b.stress.c[k]), 1e-12 * max_abs(a.stress.c[k]));
  EXPECT_NEAR(a.dissipation->total(), b.dissipation->total(), 1e-10 * a.dissipation->total());
  EXPECT_FALSE(a.dissipation->general);
  EXPECT_TRUE(b.dissipation->general);
}

TEST(Step, SteadyStatePreserved) {
  const GridSpec g{32};
  SolverConfig cfg;
  cfg.grid = g;
  Integrator it(cfg);
  const State s0 = State::rest(g, 0.6, 0.8);
  State s = s0;
  for (std::size_t k = 0; k < 1000; ++k) s = it.advance(s, k);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    worst = std::max({worst, max_abs(s.u[i]), max_abs_diff(s.d[i], s0.d[i])});
  }
  EXPECT_LE(worst, 1e-14);
}

TEST(Step, DivergenceFreeAndMeanFree) {
  const GridSpec g{32};
  Rng rng(17);
  SolverConfig cfg;
  cfg.grid = g;
  Integrator it(cfg);
  State s{random_solenoidal(g, rng, 3.0), VectorField2(SpectralField::constant(g, 1.0), SpectralField(g)), 0.0};
  s.d += 0.3 * random_vector_field(g, rng, 4.0);
  for (std::size_t k = 0; k < 50; ++k) {
    s = it.advance(s, k);
    double worst = 0.0;
    const int n = g.n;
    for (int i0 = 0; i0 < n; ++i0) {
      for (int i1 = 0; i1 < n; ++i1) {
        const std::size_t idx = static_cast<std::size_t>(i0) * n + i1;
        worst = std::max(worst, std::abs(static_cast<double>(wavenumber(i0, n)) * s.u[0].coeffs()[idx] +
                                         static_cast<double>(wavenumber(i1, n)) * s.u[1].coeffs()[idx]));
      }
    }
    ASSERT_LE(worst, 1e-12 * l2_norm(s.u)) << "step " << k;
    ASSERT_EQ(s.u[0](0, 0), cplx(0.0));
    ASSERT_EQ(s.u[1](0, 0), cplx(0.0));
  }
}

TEST(Step, NonFiniteStateNamesTheStep) {
  const GridSpec g{16};
  SolverConfig cfg;
  cfg.grid = g;
  State s = State::rest(g);
  s.d[0].at(1, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    Integrator(cfg).advance(s, 7);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.step(), 7u);
  }
}

// d' = -(d^2 - 1) d from d0 has d(t)^2 = 1 / (1 - (1 - 1/d0^2) e^{-2t}).
double uniform_director(double d0, double t) { return 1.0 / std::sqrt(1.0 - (1.0 - 1.0 / (d0 * d0)) * std::exp(-2.0 * t)); }

double ode_error(Scheme scheme, double dt) {
  const GridSpec g{8};
  SolverConfig cfg;
  cfg.grid = g;
  cfg.dt = dt;
  cfg.t_end = 1.0;
  cfg.scheme = scheme;
  auto res = run(cfg, State::rest(g, 2.0, 0.0));
  const double exact = uniform_director(2.0, 1.0);
  return std::abs(res.final_state.d[0](0, 0).real() - exact) / exact;
}

TEST(Step, UniformDirectorFollowsOde) {
  const double e1 = ode_error(Scheme::if_euler, 1e-3);
  const double e2 = ode_error(Scheme::if_euler, 5e-4);
  // First order: halving dt halves the error.
  EXPECT_GE(e1 / e2, 1.8);
  EXPECT_LE(e1 / e2, 2.2);
  EXPECT_LT(e1, 1e-3);
  EXPECT_LT(ode_error(Scheme::if_rk2, 1e-3), 1e-6);
}

TEST(Run, ZeroEndTimeReturnsInitial) {
  const GridSpec g{16};
  Rng rng(2);
  State s{random_solenoidal(g, rng, 2.0), random_vector_field(g, rng, 2.0), 0.25};
  SolverConfig cfg;
  cfg.grid = g;
  cfg.t_end = 0.0;
  auto res = run(cfg, s);
  EXPECT_EQ(res.final_state.t, 0.25);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(max_abs_diff(res.final_state.u[i], s.u[i]), 0.0);
    EXPECT_EQ(max_abs_diff(res.final_state.d[i], s.d[i]), 0.0);
  }
  ASSERT_EQ(res.energy.size(), 1u);
  EXPECT_EQ(res.energy[0].residual, 0.0);
}

TEST(Run, Deterministic) {
  const GridSpec g{32};
  Rng rng(6);
  State s{random_solenoidal(g, rng, 3.0), VectorField2(SpectralField::constant(g, 1.0), SpectralField(g)), 0.0};
  s.d += 0.2 * random_vector_field(g, rng, 4.0);
  SolverConfig cfg;
  cfg.grid = g;
  cfg.t_end = 0.05;
  cfg.energy_cadence = 5;
  auto a = run(cfg, s);
  auto b = run(cfg, s);
  ASSERT_EQ(a.energy.size(), b.energy.size());
  ASSERT_EQ(a.energy.size(), 11u);
  for (std::size_t k = 0; k < a.energy.size(); ++k) {
    EXPECT_EQ(a.energy[k].record.e_total, b.energy[k].record.e_total);
    EXPECT_EQ(a.energy[k].record.d_total, b.energy[k].record.d_total);
    EXPECT_EQ(a.energy[k].residual, b.energy[k].residual);
  }
  EXPECT_EQ(a.energy.back().record.t, 0.05);
}

TEST(Pressure, MeanZeroAndVanishesForShear) {
  const GridSpec g{32};
  const auto c = LeslieCoefficients::ansatz(1.0);
  State shear = State::rest(g);
  shear.u[0] = SpectralField::sine(g, 0, 1);
  EXPECT_LT(max_abs(recover_pressure(shear, c)), 1e-15);
  Rng rng(3);
  State s{random_solenoidal(g, rng, 2.0), random_vector_field(g, rng, 2.0), 0.0};
  auto p = recover_pressure(s, c);
  EXPECT_EQ(p(0, 0), cplx(0.0));
  EXPECT_GT(l2_norm(p), 0.0);
}
