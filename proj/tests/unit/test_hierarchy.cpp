#include <gtest/gtest.h>

#include <cmath>

#include "whitham/harness.hpp"
#include "whitham/hierarchy.hpp"

using namespace whitham;
using namespace whitham::hierarchy;
using wme::FieldPair;
using wme::StageRef;

namespace {

RealField d(const RealField& f, int p = 1) { return spectral_derivative(f, p); }
RealField mul(const RealField& a, const RealField& b) { return pointwise_product(a, b); }

wme::ModulationState bump(std::size_t n) {
  const Grid1D g(16 * pi, n);
  const auto r = RealField::sample(g, [](Real x) { return 0.1L * std::exp(-x * x); });
  const auto u = RealField::sample(g, [](Real x) { return -0.1L * std::sqrt(2 * std::exp(Real(1))) * x * std::exp(-x * x); });
  return {0, r, u, 1};
}

struct Fixture {
  static constexpr Real dt = 0.0025L;
  static const Hierarchy& get(unsigned n) {
    static const auto base = wme::wme_integrate(bump(1024), 0.1L, dt);
    static const Hierarchy h1 = build_hierarchy(base, 1, dt);
    static const Hierarchy h2 = build_hierarchy(base, 2, dt);
    return n == 1 ? h1 : h2;
  }
};

Real rel(const RealField& a, const RealField& b) { return linf_norm(a - b) / std::max(linf_norm(b), Real(1e-300)); }

}  // namespace

TEST(Hierarchy, RestStateHasNoCorrections) {
  const Grid1D g(16 * pi, 64);
  const auto base = wme::wme_integrate({0, RealField(g), RealField(g), 1}, 0.1L, 0.01L);
  const auto h = build_hierarchy(base, 3, 0.01L);
  ASSERT_EQ(h.levels.size(), 3u);
  for (const auto& lv : h.levels) {
    EXPECT_EQ(linf_norm(lv.node(lv.steps()).first), 0);
    EXPECT_EQ(linf_norm(lv.node(lv.steps()).second), 0);
  }
}

TEST(Hierarchy, RejectsTooHighOrder) {
  const Grid1D g(16 * pi, 64);
  const auto base = wme::wme_integrate({0, RealField(g), RealField(g), 1}, 0.1L, 0.01L);
  EXPECT_THROW(build_hierarchy(base, 4, 0.01L), std::invalid_argument);
}

TEST(Hierarchy, FirstForcingMatchesHandFormula) {
  const auto& h = Fixture::get(1);
  for (std::size_t step : {0, 17, 39}) {
    for (int stage = 0; stage < 4; ++stage) {
      const StageRef s{step, stage};
      const RealField& r = h.base.path.state(s).first;
      const auto [Hr, Hu] = level_forcing(h.base, {}, 1, s);
      const RealField expected = d(r, 3) + d(mul(d(r), d(r)));
      EXPECT_LT(linf_norm(Hr), 1e-15L);
      EXPECT_LT(linf_norm(Hu - expected), 1e-10L);
    }
  }
}

TEST(Hierarchy, SecondForcingMatchesHandFormula) {
  const auto& h = Fixture::get(2);
  for (std::size_t step : {5, 30}) {
    const StageRef s{step, 2};
    const RealField& r = h.base.path.state(s).first;
    const auto& [r1, u1] = h.levels[0].state(s);
    const auto [Hr, Hu] = level_forcing(h.base, {h.levels[0]}, 2, s);
    const RealField e2r = map_values(r, [](Real v) { return std::exp(2 * v); });
    const RealField er = Real(-2) * mul(u1, d(r1));
    const RealField eu = -(Real(2) * mul(u1, d(u1)) + d(Real(2) * mul(e2r, mul(r1, r1))) - d(r1, 3) -
                           Real(2) * d(mul(d(r), d(r1))));
    EXPECT_LT(rel(Hr, er), 1e-8L);
    EXPECT_LT(rel(Hu, eu), 1e-8L);
  }
}

TEST(Hierarchy, LevelsStartAtZero) {
  const auto& h = Fixture::get(2);
  for (const auto& lv : h.levels) {
    EXPECT_EQ(linf_norm(lv.node(0).first), 0);
    EXPECT_EQ(linf_norm(lv.node(0).second), 0);
    EXPECT_GT(linf_norm(lv.node(lv.steps()).second), 0);
  }
}

TEST(Hierarchy, AssemblyAtZeroEpsIsTheBase) {
  const auto& h = Fixture::get(2);
  const auto s = assemble(h, 0, 0.05L);
  const auto& b = h.base.path.node(20);
  EXPECT_EQ(linf_norm(s.r - b.first), 0);
  EXPECT_EQ(linf_norm(s.u - b.second), 0);
}

TEST(Hierarchy, AssemblyIsTheEpsSquaredSeries) {
  const auto& h = Fixture::get(2);
  const Real eps = 0.1L;
  const auto s = assemble(h, eps, 0.1L);
  const auto& b = h.base.path.node(40);
  const auto& l1 = h.levels[0].node(40);
  const auto& l2 = h.levels[1].node(40);
  const Real e2 = eps * eps;
  EXPECT_LT(linf_norm(s.r - (b.first + e2 * l1.first + e2 * e2 * l2.first)), 1e-17L);
  EXPECT_LT(linf_norm(s.u - (b.second + e2 * l1.second + e2 * e2 * l2.second)), 1e-17L);
}

TEST(Hierarchy, CorrectionIsOrderEpsSquared) {
  const auto& h = Fixture::get(1);
  std::vector<double> xs, ys;
  for (Real eps : {0.2L, 0.1L, 0.05L}) {
    const auto s = assemble(h, eps, 0.1L);
    xs.push_back(static_cast<double>(eps));
    ys.push_back(static_cast<double>(sobolev_norm(s.u - h.base.path.node(40).second, 1)));
  }
  EXPECT_GE(harness::fit_slope(xs, ys).slope, 1.9);
}

TEST(Phase, RestWavetrainHasZeroPhase) {
  const Grid1D g(16 * pi, 64);
  const auto base = wme::wme_integrate({0, RealField(g), RealField(g), 1}, 0.1L, 0.01L);
  const auto h = build_hierarchy(base, 1, 0.01L);
  const auto ph = lift_phase(h, 0.1L, RealField(g), 0.01L);
  EXPECT_EQ(linf_norm(ph.nodes.back().phi_hat), 0);
  const auto res = residuals(h, ph, 0.1L, {0, 5, 10});
  for (const auto& r : res) {
    EXPECT_EQ(r.norm_h1, 0);
    EXPECT_EQ(r.norm_h2, 0);
  }
}

TEST(Phase, GradientIdentityAndPathAgreement) {
  const auto& h = Fixture::get(1);
  const RealField phi0 = spectral_antiderivative(h.base.path.node(0).second);
  for (Real eps : {0.2L, 0.05L}) {
    const auto ph = lift_phase(h, eps, phi0, Fixture::dt);
    const auto res = residuals(h, ph, eps, {0, 10, 20, 40});
    for (const auto& r : res) EXPECT_LE(r.gradient_identity, 1e-9L);
    EXPECT_LE(relative_path_gap(res), 1e-8L);
  }
}

TEST(Phase, RejectsMismatchedInputs) {
  const auto& h = Fixture::get(1);
  const RealField phi0 = spectral_antiderivative(h.base.path.node(0).second);
  EXPECT_THROW(lift_phase(h, 0.1L, phi0, 2 * Fixture::dt), std::invalid_argument);
  EXPECT_THROW(lift_phase(h, 0.1L, RealField(Grid1D(1, 1024)), Fixture::dt), std::invalid_argument);
  const auto ph = lift_phase(h, 0.1L, phi0, Fixture::dt);
  EXPECT_THROW(residuals(h, ph, 0.2L, {0}), std::invalid_argument);
  EXPECT_THROW(residuals(h, ph, 0.1L, {41}), std::invalid_argument);
}

TEST(Phase, ResidualOrderMatchesHierarchyOrder) {
  for (unsigned n : {1u, 2u}) {
    const auto& h = Fixture::get(n);
    const RealField phi0 = spectral_antiderivative(h.base.path.node(0).second);
    std::vector<double> xs, ys;
    for (Real eps : {0.2L, 0.1L, 0.05L}) {
      const auto ph = lift_phase(h, eps, phi0, Fixture::dt);
      Real worst = 0;
      for (const auto& r : residuals(h, ph, eps, {10, 20, 30, 40})) worst = std::max(worst, r.norm_h1);
      xs.push_back(static_cast<double>(eps));
      ys.push_back(static_cast<double>(worst));
    }
    EXPECT_GE(harness::fit_slope(xs, ys).slope, 2.0 * (n + 1) - 0.2) << "n = " << n;
  }
}
