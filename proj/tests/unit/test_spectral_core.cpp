#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fwlab/spectral_core.hpp"

using namespace fwlab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs_diff(const Field& a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) worst = std::max(worst, std::abs(a[m] - b[m]));
  return worst;
}

template <class F>
std::vector<double> sample(const GridSpec& g, F&& f) {
  std::vector<double> v(g.size());
  for (std::size_t m = 0; m < v.size(); ++m) v[m] = f(g.x(m));
  return v;
}

Field random_field(const GridSpec& g, unsigned seed, std::size_t max_mode) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Complex> half(g.size() / 2 + 1, 0.0);
  for (std::size_t k = 0; k <= max_mode; ++k) half[k] = Complex(nd(rng), k == 0 ? 0.0 : nd(rng));
  return Field::from_half_spectrum(g, half);
}

}  // namespace

TEST(GridSpec, RejectsBadSizes) {
  EXPECT_THROW(GridSpec(1.0, 100), ContractViolation);
  EXPECT_THROW(GridSpec(1.0, 8), ContractViolation);
  EXPECT_THROW(GridSpec(0.0, 64), ContractViolation);
  EXPECT_THROW(GridSpec(-1.0, 64), ContractViolation);
  EXPECT_NO_THROW(GridSpec(1.0, 16));
}

TEST(GridSpec, CoordinatesAndFrequencies) {
  const GridSpec g(64.0, 1 << 15);
  EXPECT_DOUBLE_EQ(g.dx(), 128.0 / 32768.0);
  EXPECT_DOUBLE_EQ(g.x(0), -64.0);
  EXPECT_DOUBLE_EQ(g.x(g.size() / 2), 0.0);
  EXPECT_NEAR(g.nyquist(), kPi * 32768 / 128.0, 1e-12);
  EXPECT_NEAR(g.nyquist(), 804.247719, 1e-6);
  EXPECT_EQ(g.mode(1), 1);
  EXPECT_EQ(g.mode(g.size() - 1), -1);
  EXPECT_EQ(g.mode(g.size() / 2), -static_cast<std::ptrdiff_t>(g.size() / 2));
  EXPECT_DOUBLE_EQ(g.frequency(3), 3.0 * kPi / 64.0);
  EXPECT_EQ(g.coordinates().size(), g.size());
  EXPECT_EQ(g.dealias_mode_limit(), g.size() / 3);
}

TEST(Field, ConstantSpectrumConcentratedAtZero) {
  const GridSpec g(3.0, 64);
  const Field f = Field::from_function(g, [](double) { return 1.0; });
  const auto c = to_spectrum(f);
  EXPECT_NEAR(c[0].real(), 64.0, 1e-12);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_LT(std::abs(c[k]), 1e-13) << k;
}

TEST(Field, FirstModeHasTwoCoefficients) {
  const double L = 5.0;
  const GridSpec g(L, 128);
  const Field f = Field::from_function(g, [&](double x) { return std::sin(kPi * x / L); });
  const auto c = to_spectrum(f);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k == 1 || k == c.size() - 1) {
      EXPECT_NEAR(std::abs(c[k]), 64.0, 1e-10);
    } else {
      EXPECT_LT(std::abs(c[k]), 1e-12) << k;
    }
  }
}

TEST(Field, RoundTripRandomSamples) {
  const GridSpec g(7.0, 256);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> s(g.size());
  for (auto& v : s) v = u(rng);
  const Field f = Field::from_samples(g, s);
  const Field back = to_samples(to_spectrum(f), g);
  EXPECT_LT(max_abs_diff(back, s), 1e-12);
}

TEST(Field, LengthMismatchIsContractViolation) {
  const GridSpec g(1.0, 32);
  EXPECT_THROW(Field::from_samples(g, std::vector<double>(31)), ContractViolation);
  EXPECT_THROW(to_samples(std::vector<Complex>(16), g), ContractViolation);
  EXPECT_THROW(Field::from_half_spectrum(g, std::vector<Complex>(16)), ContractViolation);
}

TEST(Field, GridMismatchIsContractViolation) {
  Field a(GridSpec(1.0, 32));
  const Field b(GridSpec(2.0, 32));
  EXPECT_THROW(a += b, ContractViolation);
}

TEST(Field, ArithmeticIsLinearInBothRepresentations) {
  const GridSpec g(4.0, 64);
  const Field a = random_field(g, 1, 10);
  const Field b = random_field(g, 2, 10);
  const Field c = 2.0 * a - b;
  for (std::size_t m = 0; m < g.size(); ++m) EXPECT_NEAR(c[m], 2.0 * a[m] - b[m], 1e-13);
  const Field check = Field::from_samples(g, {c.samples().begin(), c.samples().end()});
  for (std::size_t k = 0; k < c.half_spectrum().size(); ++k)
    EXPECT_LT(std::abs(c.half_spectrum()[k] - check.half_spectrum()[k]), 1e-11);
}

TEST(Field, ContinuumTransformOfGaussian) {
  // The Gaussian e^{-x^2/2} has transform sqrt(2 pi) e^{-xi^2/2}.
  const GridSpec g(20.0, 512);
  const Field f = Field::from_function(g, [](double x) { return std::exp(-0.5 * x * x); });
  for (std::size_t idx : {0u, 5u, 20u, 507u}) {
    const double xi = g.frequency(idx);
    EXPECT_NEAR(f.continuum_transform(idx).real(), std::sqrt(2 * kPi) * std::exp(-0.5 * xi * xi), 1e-12);
    EXPECT_NEAR(f.continuum_transform(idx).imag(), 0.0, 1e-12);
  }
  const Field back = Field::from_continuum_transform(
      g, [](double xi) { return Complex(std::sqrt(2 * kPi) * std::exp(-0.5 * xi * xi), 0.0); });
  EXPECT_LT(max_abs_diff(back, f.samples()), 1e-12);
}

TEST(Multiplier, IdentityLeavesFieldUnchanged) {
  const GridSpec g(3.0, 128);
  const Field f = random_field(g, 5, 40);
  const Field out = multiplier_apply(FourierMultiplier::identity(g), f);
  EXPECT_LT(max_abs_diff(out, f.samples()), 1e-13);
}

TEST(Multiplier, DerivativeOfPureMode) {
  const double L = 16 * kPi;  // xi = k/16
  const GridSpec g(L, 1024);
  const double xi0 = 2.0;
  const Field f = Field::from_function(g, [&](double x) { return std::sin(xi0 * x); });
  const Field d = multiplier_apply(FourierMultiplier::derivative(g), f);
  EXPECT_LT(max_abs_diff(d, sample(g, [&](double x) { return xi0 * std::cos(xi0 * x); })), 1e-12);
}

TEST(Multiplier, HelmholtzSymbolOnCosine) {
  const double L = 16 * kPi;
  const GridSpec g(L, 512);
  const auto m = FourierMultiplier::real_output(g, [](double xi) { return Complex(0.0, xi / (1 + xi * xi)); });
  for (double xi0 : {0.5, 2.0, 7.25}) {
    const Field f = Field::from_function(g, [&](double x) { return std::cos(xi0 * x); });
    const Field out = multiplier_apply(m, f);
    const double a = -xi0 / (1 + xi0 * xi0);
    EXPECT_LT(max_abs_diff(out, sample(g, [&](double x) { return a * std::sin(xi0 * x); })), 1e-12) << xi0;
  }
}

TEST(Multiplier, RealOutputRejectsNonHermitianSymbol) {
  const GridSpec g(1.0, 32);
  EXPECT_THROW(FourierMultiplier::real_output(g, [](double xi) { return Complex(xi, 0.0); }), ContractViolation);
  const auto m = FourierMultiplier::from_symbol(g, [](double xi) { return Complex(xi, 0.0); });
  EXPECT_FALSE(m.is_real_output());
}

TEST(Multiplier, GridMismatch) {
  const GridSpec g(1.0, 32);
  const Field f(GridSpec(1.0, 64));
  EXPECT_THROW(multiplier_apply(FourierMultiplier::identity(g), f), ContractViolation);
}

TEST(Dealias, ZeroTimesZero) {
  const GridSpec g(2.0, 64);
  const Field z(g);
  const Field p = dealiased_product(z, z);
  for (double v : p.samples()) EXPECT_EQ(v, 0.0);
}

TEST(Dealias, UnitFactorLeavesBandLimitedFieldUnchanged) {
  const GridSpec g(2.0, 256);
  const Field one = Field::from_function(g, [](double) { return 1.0; });
  const Field f = random_field(g, 9, g.dealias_mode_limit() - 2);
  EXPECT_LT(max_abs_diff(dealiased_product(one, f), f.samples()), 1e-12);
}

TEST(Dealias, SquareOfSineMatchesPointwiseProduct) {
  const double L = 16 * kPi;
  const GridSpec g(L, 512);  // nyquist 16, cutoff 10.67
  const double xi0 = 3.0;
  const Field s = Field::from_function(g, [&](double x) { return std::sin(xi0 * x); });
  const Field p = dealiased_product(s, s);
  std::vector<double> direct(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) direct[m] = s[m] * s[m];
  EXPECT_LT(max_abs_diff(p, direct), 1e-12);
  EXPECT_LT(max_abs_diff(p, sample(g, [&](double x) { return 0.5 * (1 - std::cos(2 * xi0 * x)); })), 1e-12);
}

TEST(Dealias, ProductAboveCutoffIsRemoved) {
  const double L = 16 * kPi;
  const GridSpec g(L, 512);
  const double xi0 = 6.0;  // 2 xi0 = 12 exceeds the 10.67 cutoff
  const Field s = Field::from_function(g, [&](double x) { return std::sin(xi0 * x); });
  EXPECT_LT(max_abs_diff(dealiased_product(s, s), std::vector<double>(g.size(), 0.5)), 1e-12);
}

TEST(Norms, L2OfSineIsRootL) {
  const double L = 16 * kPi;
  const GridSpec g(L, 256);
  const Field s = Field::from_function(g, [](double x) { return std::sin(2.0 * x); });
  EXPECT_NEAR(lp_norm(s, 2.0), std::sqrt(L), 1e-12);
}

TEST(Norms, ZeroField) {
  const Field z(GridSpec(1.0, 32));
  EXPECT_EQ(lp_norm(z, 2.0), 0.0);
  EXPECT_EQ(lp_norm(z, kInf), 0.0);
}

TEST(Norms, UnsupportedP) {
  const Field z(GridSpec(1.0, 32));
  EXPECT_THROW(lp_norm(z, 1.0), UnsupportedParameter);
  EXPECT_THROW(lp_norm(z, 3.0), UnsupportedParameter);
}

TEST(Norms, PeakonSupIsPeakValue) {
  const GridSpec g(64.0, 1 << 15);
  const Field p = Field::from_function(g, [](double x) { return 8.0 / 9.0 * std::exp(-0.5 * std::abs(x)); });
  EXPECT_NEAR(lp_norm(p, kInf), 8.0 / 9.0, 1e-6);
}

TEST(OversampledSup, FactorOneIsGridMax) {
  const GridSpec g(3.0, 64);
  const Field f = random_field(g, 4, 20);
  double grid_max = 0.0;
  for (double v : f.samples()) grid_max = std::max(grid_max, std::abs(v));
  EXPECT_DOUBLE_EQ(oversampled_sup(f, 1), grid_max);
  EXPECT_THROW(oversampled_sup(f, 0), ContractViolation);
}

TEST(OversampledSup, ConstantForEveryFactor) {
  const GridSpec g(3.0, 32);
  const Field c = Field::from_function(g, [](double) { return -2.5; });
  for (std::size_t factor : {1u, 2u, 4u, 8u}) EXPECT_NEAR(oversampled_sup(c, factor), 2.5, 1e-14);
}

TEST(OversampledSup, ApproachesDenseAnalyticMaximum) {
  // Half-Nyquist sine shifted off the grid: the coarse samples miss the crest.
  const double L = kPi;
  const GridSpec g(L, 32);
  const double xi = g.nyquist() / 2.0;
  const double shift = 0.37 * g.dx();
  const auto f = [&](double x) { return std::sin(xi * (x - shift)); };
  const Field field = Field::from_function(g, f);
  const double dense = 1.0;  // the shifted sine still reaches its crest on the circle
  double previous_error = 1.0;
  for (std::size_t factor : {1u, 2u, 4u, 16u, 64u}) {
    const double error = dense - oversampled_sup(field, factor);
    EXPECT_GE(error, -1e-12);
    EXPECT_LE(error, previous_error + 1e-15) << factor;
    previous_error = error;
  }
  EXPECT_LT(previous_error, 1e-3);
}

TEST(OversampledSup, RefinedCrestIsExact) {
  // Crest between samples of both the coarse and the fine grid.
  const GridSpec g(kPi, 64);
  const double xi = 7.0;
  const double shift = 0.29 * g.dx();
  const Field f = Field::from_function(g, [&](double x) { return 0.3 + std::cos(xi * (x - shift)); });
  EXPECT_NEAR(oversampled_sup(f, 4), 1.3, 1e-14);
  EXPECT_NEAR(oversampled_sup(f, 2), 1.3, 1e-14);
  const Field neg = -1.0 * f;
  EXPECT_NEAR(oversampled_sup(neg, 4), 1.3, 1e-14);
  EXPECT_LT(oversampled_sup(f, 1), 1.3 - 1e-6);
}

TEST(OversampledSup, GridIndependentForBandLimitedData) {
  auto field = [](const GridSpec& g) {
    return Field::from_function(g, [](double x) { return std::exp(-x * x) * std::sin(5.3 * x); });
  };
  const double coarse = oversampled_sup(field(GridSpec(16.0, 1024)));
  const double fine = oversampled_sup(field(GridSpec(16.0, 4096)));
  EXPECT_NEAR(coarse, fine, 1e-14);
}

TEST(Hermitian, DefectOfRealFieldIsZero) {
  const GridSpec g(2.0, 64);
  const Field f = random_field(g, 11, 30);
  EXPECT_LT(hermitian_defect(f.spectrum()), 1e-12);
  auto c = f.spectrum();
  c[3] += Complex(0.0, 1.0);
  EXPECT_NEAR(hermitian_defect(c), 1.0, 1e-12);
}
