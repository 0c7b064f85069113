#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "whitham/harness.hpp"
#include "whitham/jets.hpp"

using namespace whitham;
using jets::JetField;

namespace {

const Grid1D grid(2 * pi, 64);

RealField smooth(int seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const double a = u(rng), b = u(rng), c = u(rng);
  return RealField::sample(grid, [=](Real x) { return a * std::sin(x) + b * std::cos(2 * x) + c * std::sin(3 * x); });
}

JetField random_jet(unsigned order, int seed) {
  std::vector<RealField> c;
  for (unsigned l = 0; l <= order; ++l) c.push_back(smooth(seed * 10 + static_cast<int>(l)));
  return JetField(c);
}

Real diff(const RealField& a, const RealField& b) { return linf_norm(a - b); }

}  // namespace

TEST(Jet, EmbeddingOfScalars) {
  const auto a = smooth(1), b = smooth(2);
  const auto p = jets::jet_mul(JetField::constant(a, 1), JetField::constant(b, 1));
  EXPECT_LT(diff(p[0], pointwise_product(a, b)), 1e-14L);
  EXPECT_EQ(linf_norm(p[1]), 0);
}

TEST(Jet, TruncationDropsHigherTerms) {
  const JetField a({RealField(grid), smooth(3)});
  const JetField b({RealField(grid), smooth(4)});
  const auto p = jets::jet_mul(a, b);
  EXPECT_EQ(linf_norm(p[0]), 0);
  EXPECT_EQ(linf_norm(p[1]), 0);
}

TEST(Jet, MismatchThrows) {
  EXPECT_THROW(jets::jet_mul(random_jet(1, 1), random_jet(2, 2)), std::invalid_argument);
  const JetField other({RealField(Grid1D(1, 64))});
  EXPECT_THROW(jets::jet_add(JetField::zero(grid, 0), other), std::invalid_argument);
}

TEST(Jet, EvaluationOracleForProducts) {
  // Truncation error of a product of order-1 jets is eps^4 times a fixed field.
  const auto a = random_jet(1, 5), b = random_jet(1, 6);
  std::vector<double> xs, ys;
  for (Real e : {Real(1e-1), Real(1e-2), Real(1e-3)}) {
    const Real err = diff(jets::jet_mul(a, b).evaluate(e), pointwise_product(a.evaluate(e), b.evaluate(e)));
    xs.push_back(static_cast<double>(e));
    ys.push_back(static_cast<double>(err));
  }
  const auto fit = harness::fit_slope(xs, ys);
  EXPECT_NEAR(fit.slope, 4.0, 0.05);
}

TEST(Jet, RingAxioms) {
  const auto a = random_jet(2, 7), b = random_jet(2, 8), c = random_jet(2, 9);
  const auto ab_c = jets::jet_mul(jets::jet_mul(a, b), c);
  const auto a_bc = jets::jet_mul(a, jets::jet_mul(b, c));
  const auto dist_l = jets::jet_mul(a, b + c);
  const auto dist_r = jets::jet_mul(a, b) + jets::jet_mul(a, c);
  for (unsigned l = 0; l <= 2; ++l) {
    EXPECT_LT(diff(ab_c[l], a_bc[l]), 1e-12L);
    EXPECT_LT(diff(dist_l[l], dist_r[l]), 1e-12L);
  }
}

TEST(Jet, ExpOfConstantJet) {
  const JetField a({RealField::constant(grid, 0.3L), RealField(grid)});
  const auto e = jets::jet_exp(a, 2);
  EXPECT_LT(linf_norm(e[0] + Real(-std::exp(0.6L))), 1e-15L);
  EXPECT_EQ(linf_norm(e[1]), 0);
}

TEST(Jet, ExpFirstOrderTaylor) {
  const auto r1 = smooth(12);
  const auto e = jets::jet_exp(JetField({RealField(grid), r1}), 2);
  EXPECT_LT(linf_norm(e[0] + Real(-1)), 1e-15L);
  EXPECT_LT(diff(e[1], Real(2) * r1), 1e-15L);
}

TEST(Jet, ExpEvaluationOracle) {
  const auto a = random_jet(2, 13);
  std::vector<double> xs, ys;
  for (Real e : {Real(0.2), Real(0.1), Real(0.05)}) {
    const auto direct = map_values(a.evaluate(e), [](Real v) { return std::exp(2 * v); });
    xs.push_back(static_cast<double>(e));
    ys.push_back(static_cast<double>(diff(jets::jet_exp(a, 2).evaluate(e), direct)));
  }
  EXPECT_GT(harness::fit_slope(xs, ys).slope, 5.8);
}

TEST(Jet, CompositeHomomorphism) {
  // E(a, b) = exp(a) * d(b) + a * a
  const auto a = random_jet(1, 14), b = random_jet(1, 15);
  std::vector<double> xs, ys;
  for (Real e : {Real(0.2), Real(0.1), Real(0.05)}) {
    const auto jet = jets::jet_mul(jets::jet_exp(a, 1), jets::jet_derivative(b)) + jets::jet_mul(a, a);
    const auto ae = a.evaluate(e), be = b.evaluate(e);
    const auto direct = pointwise_product(map_values(ae, [](Real v) { return std::exp(v); }), spectral_derivative(be)) +
                        pointwise_product(ae, ae);
    xs.push_back(static_cast<double>(e));
    ys.push_back(static_cast<double>(diff(jet.evaluate(e), direct)));
  }
  EXPECT_NEAR(harness::fit_slope(xs, ys).slope, 4.0, 0.05);
}

TEST(JetDefect, FrozenSineGivesLevelOneForcing) {
  // r = sin X, u = 0, no time dependence: level-1 u-defect is -(r_XXX + ((r_X)^2)_X)
  const auto r = RealField::sample(grid, [](Real x) { return std::sin(x); });
  const auto zero = JetField::zero(grid, 1);
  const auto [dr, du] = jets::jet_defect_swe(JetField::constant(r, 1), zero, 1, zero, zero);
  const RealField rx = RealField::sample(grid, [](Real x) { return std::cos(x); });
  const RealField rxxx = RealField::sample(grid, [](Real x) { return -std::cos(x); });
  const RealField rx2_x = RealField::sample(grid, [](Real x) { return -std::sin(2 * x); });  // (cos^2)' = -sin 2x
  EXPECT_LT(diff(du[1], -(rxxx + rx2_x)), 1e-12L);
  EXPECT_LT(linf_norm(dr[1]), 1e-15L);
  // coefficient 0 is the frozen SWE defect: 2 k r_X and (e^{2r})_X
  EXPECT_LT(diff(dr[0], Real(2) * rx), 1e-12L);
  const RealField e2x = RealField::sample(grid, [](Real x) { return 2 * std::cos(x) * std::exp(2 * std::sin(x)); });
  EXPECT_LT(diff(du[0], e2x), 1e-12L);
}

TEST(JetDefect, HandCodedLevelTwoStructure) {
  // With levels 0 and 1 filled and slot 2 empty, coefficient 2 of the defect is
  //   d_r: 2 u1 r1_X
  //   d_u: 2 u1 u1_X + (2 e^{2r} r1^2)_X - r1_XXX - 2 (r_X r1_X)_X
  const auto r = smooth(20), u = smooth(21), r1 = smooth(22), u1 = smooth(23);
  const RealField z(grid);
  const JetField rj({r, r1, z}), uj({u, u1, z});
  const auto zero = JetField::zero(grid, 2);
  const auto [dr, du] = jets::jet_defect_swe(rj, uj, 1, zero, zero);

  auto d = [](const RealField& f, int p = 1) { return spectral_derivative(f, p); };
  const RealField hr = Real(2) * pointwise_product(u1, d(r1));
  const RealField e2r = map_values(r, [](Real v) { return std::exp(2 * v); });
  const RealField hu = Real(2) * pointwise_product(u1, d(u1)) + d(Real(2) * pointwise_product(e2r, pointwise_product(r1, r1))) -
                       d(r1, 3) - Real(2) * d(pointwise_product(d(r), d(r1)));
  EXPECT_LT(diff(dr[2], hr), 1e-10L);
  EXPECT_LT(diff(du[2], hu) / linf_norm(hu), 1e-8L);
}
