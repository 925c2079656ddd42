#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lcflow/norms.hpp"
#include "lcflow/random_field.hpp"
#include "lcflow/spectral_field.hpp"

using namespace lcflow;

namespace {

constexpr double pi = std::numbers::pi;

GridSpec grid64() { return GridSpec{64, Padding::two}; }

PhysicalField sample(int n, double (*fn)(double, double)) {
  PhysicalField p(n);
  for (int j0 = 0; j0 < n; ++j0) {
    for (int j1 = 0; j1 < n; ++j1) p.v[static_cast<std::size_t>(j0) * n + j1] = fn(2 * pi * j0 / n, 2 * pi * j1 / n);
  }
  return p;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a.coeffs()[k] - b.coeffs()[k]));
  return worst;
}

}  // namespace

TEST(GridSpec, RejectsOddAndSmall) {
  EXPECT_THROW((GridSpec{7}.validate()), ConfigError);
  EXPECT_THROW((GridSpec{6}.validate()), ConfigError);
  EXPECT_NO_THROW((GridSpec{8}.validate()));
  EXPECT_EQ(parse_padding("3/2"), Padding::three_halves);
  EXPECT_THROW(parse_padding("5/4"), ConfigError);
  EXPECT_EQ((GridSpec{64, Padding::three_halves}.padded_size()), 96);
}

TEST(Transform, ConstantGoesToMeanMode) {
  const auto g = grid64();
  auto f = transform_forward(PhysicalField(64, 2.5), g);
  EXPECT_NEAR(f(0, 0).real(), 2.5, 1e-15);
  double rest = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) rest = std::max(rest, std::abs(f.coeffs()[k]));
  EXPECT_LT(rest, 1e-15);
}

TEST(Transform, CosineHasTwoHalves) {
  const auto g = grid64();
  auto f = transform_forward(sample(64, [](double x, double) { return std::cos(x); }), g);
  EXPECT_NEAR(f(1, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(f(-1, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(f(0, 1)), 0.0, 1e-15);
}

TEST(Transform, RoundTripRandom) {
  const auto g = grid64();
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_field(g, rng, 0.0);
    auto back = transform_forward(transform_inverse(f), g);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      num += std::norm(back.coeffs()[k] - f.coeffs()[k]);
      den += std::norm(f.coeffs()[k]);
    }
    EXPECT_LT(std::sqrt(num / den), 1e-13);
  }
}

TEST(Transform, SizeMismatchIsConfigError) {
  EXPECT_THROW(transform_forward(PhysicalField(32), grid64()), ConfigError);
  EXPECT_THROW(SpectralField(grid64()) + SpectralField(GridSpec{32}), ConfigError);
}

TEST(Transform, NyquistDroppedAndHermitian) {
  const auto g = GridSpec{8};
  std::vector<cplx> c(64, cplx(1.0, 1.0));
  auto f = SpectralField::from_coefficients(g, c, true);
  EXPECT_EQ(f(4, 0), cplx(0.0));
  EXPECT_EQ(f(2, 4), cplx(0.0));
  for (int k0 = -3; k0 <= 3; ++k0) {
    for (int k1 = -3; k1 <= 3; ++k1) EXPECT_EQ(f(k0, k1), std::conj(f(-k0, -k1)));
  }
}

TEST(Transform, PaddedProductMatchesPointwiseForBandLimited) {
  const auto g = GridSpec{16};
  auto f = SpectralField::cosine(g, 3, 1);
  auto h = SpectralField::sine(g, 2, -2);
  auto p = product(f, h);
  // cos(a) sin(b) = (sin(a+b) - sin(a-b)) / 2
  auto expect = 0.5 * (SpectralField::sine(g, 5, -1) - SpectralField::sine(g, 1, 3));
  EXPECT_LT(max_diff(p, expect), 1e-15);
}

TEST(Transform, ComplexProductOfModes) {
  const auto g = grid64();
  auto e3 = SpectralField::mode(g, 3, 0);
  auto p = product(e3, e3);
  EXPECT_LT(max_diff(p, SpectralField::mode(g, 6, 0)), 1e-15);
}

TEST(Derivative, EigenfunctionAndLaplacianOfConstant) {
  const auto g = grid64();
  auto e = SpectralField::mode(g, 1, 0);
  auto d = derivative(e, 0);
  EXPECT_EQ(d(1, 0), cplx(0.0, 1.0));
  auto lap = laplacian(SpectralField::constant(g, 3.0));
  EXPECT_EQ(l2_norm(lap), 0.0);
  EXPECT_THROW(derivative(e, 2), DomainError);
}

TEST(Derivative, DivergenceOfSineIsCosine) {
  const auto g = grid64();
  VectorField2 u(SpectralField::sine(g, 1, 0), SpectralField(g));
  EXPECT_LT(max_diff(divergence(u), SpectralField::cosine(g, 1, 0)), 1e-16);
}

TEST(Derivative, MixedPartialsCommute) {
  // Identical symbols; the only difference is the order of two integer multiplications.
  Rng rng(3);
  auto f = random_field(grid64(), rng, 1.0);
  auto a = derivative(derivative(f, 0), 1);
  EXPECT_LE(max_diff(a, derivative(derivative(f, 1), 0)), 4e-16 * l2_norm(a));
}

TEST(Leray, Examples) {
  const auto g = grid64();
  VectorField2 grad_cos(-1.0 * SpectralField::sine(g, 1, 0), SpectralField(g));
  EXPECT_LT(l2_norm(leray_project(grad_cos)), 1e-15);
  VectorField2 shear(SpectralField::sine(g, 0, 1), SpectralField(g));
  auto ps = leray_project(shear);
  EXPECT_LT(max_diff(ps[0], shear[0]) + max_diff(ps[1], shear[1]), 1e-16);
  VectorField2 sx(SpectralField::sine(g, 1, 0), SpectralField(g));
  EXPECT_LT(l2_norm(leray_project(sx)), 1e-15);
}

TEST(Leray, IdempotentOrthogonalDivergenceFree) {
  const auto g = grid64();
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    auto u = random_vector_field(g, rng, 1.0);
    auto pu = leray_project(u);
    auto ppu = leray_project(pu);
    EXPECT_LT(max_diff(pu[0], ppu[0]) + max_diff(pu[1], ppu[1]), 1e-13);
    EXPECT_LT(divergence_residual(pu), 1e-12 * l2_norm(pu));
    // (u - Pu) is orthogonal to Pu.
    auto r = u - pu;
    const double ip = inner_product(r[0], pu[0]) + inner_product(r[1], pu[1]);
    EXPECT_LT(std::abs(ip), 1e-12 * l2_norm(u) * l2_norm(u));
    // Gradients are annihilated.
    auto phi = random_field(g, rng, 2.0);
    EXPECT_LT(l2_norm(leray_project(gradient(phi))), 1e-13 * l2_norm(gradient(phi)));
  }
}

TEST(Norms, ParsevalMatchesPhysicalIntegral) {
  const auto g = grid64();
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = random_field(g, rng, 0.5);
    const double phys = lp_norm(transform_inverse(f), 2.0);
    EXPECT_NEAR(phys / l2_norm(f), 1.0, 1e-12);
  }
}

TEST(Norms, HsExamples) {
  const auto g = grid64();
  SpectralField zero(g);
  EXPECT_EQ(hs_norm(zero, 0.5, NormForm::fourier), 0.0);
  EXPECT_EQ(hs_norm(zero, 0.5, NormForm::lp), 0.0);
  auto e3 = SpectralField::mode(g, 3, 0);
  EXPECT_NEAR(hs_norm(e3, 0.0, NormForm::fourier), 2 * pi, 1e-14);
  EXPECT_NEAR(hs_norm(e3, 0.0, NormForm::lp), 2 * pi, 1e-14);
  // Fourier weight (1+3)^{2s}; the mode sits in block 1 alone, so the LP weight is 2^{2s}.
  EXPECT_NEAR(hs_norm(e3, 1.0, NormForm::fourier), 2 * pi * 4.0, 1e-13);
  EXPECT_NEAR(hs_norm(e3, 1.0, NormForm::lp), 2 * pi * 2.0, 1e-13);
}

// Pointwise weight-ratio bounds from tests/oracles/norm_equivalence.py at N = 64.
struct EquivCase {
  double s, lo, hi;
};

class NormEquivalence : public ::testing::TestWithParam<EquivCase> {};

TEST_P(NormEquivalence, RatioBoundedOverEnsemble) {
  const auto c = GetParam();
  const auto g = grid64();
  double rmin = 1e300, rmax = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    auto f = random_field(g, rng, 1.0);
    const double r = hs_norm(f, c.s, NormForm::fourier) / hs_norm(f, c.s, NormForm::lp);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  EXPECT_GE(rmin, c.lo * (1 - 1e-12));
  EXPECT_LE(rmax, c.hi * (1 + 1e-12));
  RecordProperty("ratio_min", std::to_string(rmin));
  RecordProperty("ratio_max", std::to_string(rmax));
}

INSTANTIATE_TEST_SUITE_P(Sweep, NormEquivalence,
                         ::testing::Values(EquivCase{-0.5, 0.6435942529055827, 1.1585044252541852},
                                           EquivCase{0.0, 1.0, 1.0},
                                           EquivCase{0.5, 1.1346190659722497, 2.446098174483136},
                                           EquivCase{1.0, 1.2758847838153686, 4.1588168477968326},
                                           EquivCase{2.0, 1.5856086647511927, 10.1919582644974}));
