#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "whitham/field.hpp"
#include "whitham/io.hpp"

using namespace whitham;

namespace {

Grid1D two_pi(std::size_t n) { return Grid1D(2 * pi, n); }

// Fourth-order central differences, periodic wrap.
std::vector<Real> fd2(const RealField& f) {
  const std::size_t n = f.size();
  const Real h = f.grid().spacing();
  std::vector<Real> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto at = [&](long o) { return f[(j + n + o) % n]; };
    out[j] = (-at(2) + 16 * at(1) - 30 * at(0) + 16 * at(-1) - at(-2)) / (12 * h * h);
  }
  return out;
}

Real max_diff(const RealField& f, const std::vector<Real>& g) {
  Real m = 0;
  for (std::size_t j = 0; j < f.size(); ++j) m = std::max(m, std::abs(f[j] - g[j]));
  return m;
}

}  // namespace

TEST(Grid, RejectsBadSizes) {
  EXPECT_THROW(Grid1D(1, 6), std::invalid_argument);
  EXPECT_THROW(Grid1D(1, 4), std::invalid_argument);
  EXPECT_THROW(Grid1D(0, 8), std::invalid_argument);
  EXPECT_NO_THROW(Grid1D(1, 8));
}

TEST(Grid, WavenumbersAreSymmetric) {
  const Grid1D g(10, 16);
  EXPECT_EQ(g.mode(0), 0);
  EXPECT_EQ(g.mode(1), 1);
  EXPECT_EQ(g.mode(8), 8);
  EXPECT_EQ(g.mode(9), -7);
  EXPECT_EQ(g.mode(15), -1);
  EXPECT_NEAR(static_cast<double>(g.wavenumber(3)), 2 * M_PI * 3 / 10, 1e-15);
  EXPECT_DOUBLE_EQ(static_cast<double>(g.coordinate(0)), -5.0);
}

TEST(Field, SizeMismatchThrows) {
  EXPECT_THROW(RealField(Grid1D(1, 8), std::vector<Real>(7)), std::invalid_argument);
  RealField a(Grid1D(1, 8)), b(Grid1D(2, 8));
  EXPECT_THROW(a += b, std::invalid_argument);
  EXPECT_THROW(l2_inner(a, b), std::invalid_argument);
}

TEST(SpectralDerivative, SineToCosine) {
  const auto g = two_pi(64);
  const auto f = RealField::sample(g, [](Real x) { return std::sin(x); });
  const auto d = spectral_derivative(f);
  for (std::size_t j = 0; j < g.points(); ++j) EXPECT_NEAR(static_cast<double>(d[j]), std::cos(static_cast<double>(g.coordinate(j))), 1e-12);
}

TEST(SpectralDerivative, ConstantHasZeroDerivatives) {
  const auto f = RealField::constant(two_pi(32), 3.5L);
  for (int p = 1; p <= 4; ++p) EXPECT_LT(linf_norm(spectral_derivative(f, p)), 1e-15L);
}

TEST(SpectralDerivative, OrderOutOfRangeThrows) {
  const RealField f(two_pi(16));
  EXPECT_THROW(spectral_derivative(f, 0), std::invalid_argument);
  EXPECT_THROW(spectral_derivative(f, 5), std::invalid_argument);
  const ComplexField z(two_pi(16));
  EXPECT_THROW(spectral_derivative(z, 0), std::invalid_argument);
}

TEST(SpectralDerivative, MatchesFourthOrderDifferences) {
  // exp(sin x), second derivative; FD error should fall by ~16 per halving of h
  Real prev = 0;
  for (std::size_t n : {64, 128}) {
    const auto f = RealField::sample(two_pi(n), [](Real x) { return std::exp(std::sin(x)); });
    const Real err = max_diff(spectral_derivative(f, 2), fd2(f));
    if (prev > 0) {
      EXPECT_GT(prev / err, 12.0L);
      EXPECT_LT(prev / err, 20.0L);
    }
    prev = err;
  }
  EXPECT_LT(prev, 1e-4L);
}

TEST(SpectralDerivative, ComposesWithItself) {
  const auto f = RealField::sample(two_pi(128), [](Real x) { return std::exp(std::cos(2 * x)); });
  const auto a = spectral_derivative(spectral_derivative(f));
  const auto b = spectral_derivative(f, 2);
  EXPECT_LT(linf_norm(a - b) / linf_norm(b), 1e-10L);
}

TEST(SpectralDerivative, OddOrdersDropNyquist) {
  const Grid1D g = two_pi(16);
  const auto f = RealField::sample(g, [](Real x) { return std::cos(8 * x); });
  EXPECT_LT(linf_norm(spectral_derivative(f, 1)), 1e-14L);
  EXPECT_NEAR(static_cast<double>(spectral_derivative(f, 2)[0]), -64.0, 1e-10);
}

TEST(SpectralDerivative, ComplexExponential) {
  const Grid1D g = two_pi(32);
  const auto f = ComplexField::sample(g, [](Real x) { return std::exp(Complex(0, 3) * x); });
  const auto d = spectral_derivative(f);
  for (std::size_t j = 0; j < g.points(); ++j) EXPECT_LT(std::abs(d[j] - Complex(0, 3) * f[j]), 1e-12L);
}

TEST(L2Inner, AnalyticValues) {
  const Grid1D g = two_pi(64);
  const auto s = RealField::sample(g, [](Real x) { return std::sin(x); });
  EXPECT_NEAR(static_cast<double>(l2_inner(s, s)), M_PI, 1e-12);
  EXPECT_EQ(l2_inner(s, RealField(g)), 0);
  const Grid1D h(7.5L, 32);
  EXPECT_NEAR(static_cast<double>(l2_inner(RealField::constant(h, 1), RealField::constant(h, 1))), 7.5, 1e-14);
}

TEST(L2Inner, SymmetricAndBilinear) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const Grid1D g(3, 64);
  auto rnd = [&] { return RealField::sample(g, [&](Real) { return nd(rng); }); };
  const auto f = rnd(), h = rnd(), k = rnd();
  EXPECT_NEAR(static_cast<double>(l2_inner(f, h)), static_cast<double>(l2_inner(h, f)), 1e-15);
  const Real lhs = l2_inner(Real(2) * f + Real(-3) * h, k);
  const Real rhs = 2 * l2_inner(f, k) - 3 * l2_inner(h, k);
  EXPECT_NEAR(static_cast<double>(lhs), static_cast<double>(rhs), 1e-13);
}

TEST(L2Inner, Parseval) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const Grid1D g(5, 128);
  const auto f = RealField::sample(g, [&](Real) { return nd(rng); });
  const auto F = forward_spectrum(to_complex(f, RealField(g)));
  Real spec = 0;
  for (const auto& c : F) spec += std::norm(c);
  spec *= g.spacing() / static_cast<Real>(g.points());
  EXPECT_LT(std::abs(spec - l2_inner(f, f)) / spec, 1e-10L);
}

TEST(Sobolev, AnalyticValues) {
  const Grid1D g = two_pi(64);
  const auto s = RealField::sample(g, [](Real x) { return std::sin(x); });
  EXPECT_NEAR(static_cast<double>(sobolev_norm(s, 0)), std::sqrt(M_PI), 1e-12);
  EXPECT_NEAR(static_cast<double>(sobolev_norm(s, 1)), std::sqrt(2 * M_PI), 1e-12);
  for (int k = 0; k <= max_sobolev_index; ++k) EXPECT_EQ(sobolev_norm(RealField(g), k), 0);
}

TEST(Sobolev, MonotoneInIndex) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    const Grid1D g(0.5L + trial, 64);
    const auto f = RealField::sample(g, [&](Real) { return nd(rng); });
    for (int s = 0; s < max_sobolev_index; ++s) EXPECT_GE(sobolev_norm(f, s + 1), sobolev_norm(f, s));
  }
}

TEST(Dealiasing, ExactForBandLimitedProducts) {
  const Grid1D g = two_pi(32);
  const auto a = RealField::sample(g, [](Real x) { return std::cos(10 * x); });
  const auto b = RealField::sample(g, [](Real x) { return std::sin(5 * x); });
  const auto p = dealiased_product(a, b);
  // cos 10x sin 5x = (sin 15x - sin 5x) / 2, all modes below N/2
  for (std::size_t j = 0; j < g.points(); ++j) {
    const Real x = g.coordinate(j);
    EXPECT_NEAR(static_cast<double>(p[j]), static_cast<double>((std::sin(15 * x) - std::sin(5 * x)) / 2), 1e-14);
  }
}

TEST(Dealiasing, RemovesAliasedModes) {
  const Grid1D g = two_pi(32);
  const auto a = RealField::sample(g, [](Real x) { return std::cos(12 * x); });
  // cos^2 12x = (1 + cos 24x) / 2; mode 24 aliases to 8 pointwise but is dropped here
  const auto p = dealiased_product(a, a);
  for (std::size_t j = 0; j < g.points(); ++j) EXPECT_NEAR(static_cast<double>(p[j]), 0.5, 1e-14);
}

TEST(Dealiasing, ExpOfSmoothField) {
  const Grid1D g = two_pi(64);
  const auto f = RealField::sample(g, [](Real x) { return std::sin(x) / 2; });
  const auto e = dealiased_exp(f, 2);
  for (std::size_t j = 0; j < g.points(); ++j) EXPECT_NEAR(static_cast<double>(e[j]), std::exp(std::sin(static_cast<double>(g.coordinate(j)))), 1e-13);
}

TEST(Resample, InterpolatesAndProjects) {
  const Grid1D g = two_pi(16);
  const auto f = RealField::sample(g, [](Real x) { return std::cos(3 * x) + std::sin(x); });
  const auto up = resample(f, 64);
  for (std::size_t j = 0; j < 64; ++j) {
    const Real x = up.grid().coordinate(j);
    EXPECT_NEAR(static_cast<double>(up[j]), static_cast<double>(std::cos(3 * x) + std::sin(x)), 1e-14);
  }
  const auto back = resample(up, 16);
  EXPECT_LT(linf_norm(back - f), 1e-15L);
}

TEST(Antiderivative, InvertsDerivative) {
  const Grid1D g(20, 128);
  const auto f = RealField::sample(g, [](Real x) { return -2 * x * std::exp(-x * x); });
  const auto F = spectral_antiderivative(f);
  const auto expected = RealField::sample(g, [](Real x) { return std::exp(-x * x); });
  const auto shifted = expected + (-mean(expected));
  EXPECT_LT(linf_norm(F - shifted), 1e-12L);
  EXPECT_THROW(spectral_antiderivative(RealField::constant(g, 1)), std::invalid_argument);
}

TEST(TailRatio, SmoothVersusRough) {
  const Grid1D g = two_pi(64);
  EXPECT_LT(spectral_tail_ratio(RealField::sample(g, [](Real x) { return std::sin(x); })), 1e-14L);
  EXPECT_GT(spectral_tail_ratio(RealField::sample(g, [](Real x) { return x > 0 ? 1.0L : 0.0L; })), 1e-3L);
  EXPECT_EQ(spectral_tail_ratio(RealField(g)), 0);
}

TEST(FieldCsv, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "whitham_field_csv";
  const Grid1D g(3.25L, 16);
  const auto f = RealField::sample(g, [](Real x) { return std::sin(x) / 3; });
  io::write_field_csv(dir / "f.csv", f);
  const auto r = io::read_field_csv(dir / "f.csv");
  EXPECT_EQ(r.grid().points(), 16u);
  EXPECT_NEAR(static_cast<double>(r.grid().length()), 3.25, 1e-15);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(static_cast<double>(r[j]), static_cast<double>(f[j]));
  std::filesystem::remove_all(dir);
}

TEST(ContentHash, MatchesGitBlobHash) {
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(io::content_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(io::content_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(ExponentialFilter, KeepsLowModesAndRemovesTopModes) {
  const Grid1D g = two_pi(64);
  const auto low = RealField::sample(g, [](Real x) { return std::sin(3 * x) + std::cos(10 * x); });
  EXPECT_LT(linf_norm(exponential_filter(low) - low), 1e-12L);
  const auto top = RealField::sample(g, [](Real x) { return std::cos(31 * x); });
  const Real factor = std::exp(-36 * std::pow(31.0L / 32, 36));
  EXPECT_LT(linf_norm(exponential_filter(top) - factor * top), 1e-15L);
  EXPECT_LT(factor, 2e-5L);
  const auto c = RealField::constant(g, 2);
  EXPECT_EQ(linf_norm(exponential_filter(c) - c), 0);
}
