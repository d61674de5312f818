#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "lojalab/loja_analysis.hpp"
#include "test_support.hpp"

using namespace lojalab;
using namespace lojalab::testing;
using std::numbers::pi;

namespace {

Field sine_mode(const Grid1D& g, double amp, int k) {
  return Field::sample(g, [&](double x) { return amp * std::sin(k * pi * x); });
}

}  // namespace

TEST(FindCritical, CylinderFromPerturbation) {
  const Grid1D g(0.0, 1.0, 99);
  const auto e = revolution_model(g);
  const auto c = revolution_volume_constraint(g, pi);
  const Field u = find_critical(*e, *c, sine_mode(g, 1e-2, 2) + sine_mode(g, 5e-3, 3));
  EXPECT_LE(u.max_abs(), 1e-10);
  EXPECT_LE(std::abs(c->value(u)[0]), 1e-12 * (1 + pi));
}

TEST(FindCritical, AllenCahnMassZero) {
  const Grid1D g(0.0, 1.0, 99);
  const Field u = find_critical(*allen_cahn_model(g), *mass_constraint(g, 0.0), sine_mode(g, 1e-2, 2));
  EXPECT_LE(u.max_abs(), 1e-10);
}

TEST(FindCritical, SequenceModelGoesToOrigin) {
  const SeqQuadModel m = SeqQuadModel::with_rule(6, LambdaRule::geometric);
  const auto e = seq_quad_model(m);
  const Field u0(e->grid(), {0.3, -0.2, 0.1, 0.5, -0.4, 0.25});
  const Field u = find_critical(*e, *no_constraint(e->grid()), u0);
  EXPECT_LE(u.max_abs(), 1e-12);
}

TEST(FindCritical, DegenerateMonomial) {
  const auto e = monomial_model(2);
  const Field u = find_critical(*e, *no_constraint(e->grid()), Field(e->grid(), {0.5}));
  EXPECT_LE(4 * std::pow(std::abs(u[0]), 3), 1e-12);
}

TEST(SampleNear, SphereSamplesStayOnSphere) {
  const auto [e, c] = sphere_toy_model(3, 1.0);
  const Field top(c->grid(), {0.0, 0.0, 1.0});
  SampleStats st;
  const auto samples = sample_near(*e, *c, top, 0.1, 40, 17, &st);
  EXPECT_EQ(st.accepted, samples.size());
  EXPECT_EQ(st.requested, 40u);
  for (const Field& x : samples) {
    EXPECT_NEAR(norm(x), 1.0, 1e-12);
    EXPECT_LE(norm(x - top), 0.101);
  }
}

TEST(SampleNear, DeterministicPerSeed) {
  const Grid1D g(0.0, 1.0, 29);
  const auto e = allen_cahn_model(g);
  const auto c = mass_constraint(g, 0.0);
  const auto a = sample_near(*e, *c, Field(g), 1e-2, 10, 5);
  const auto b = sample_near(*e, *c, Field(g), 1e-2, 10, 5);
  const auto d = sample_near(*e, *c, Field(g), 1e-2, 10, 6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].values(), b[i].values());
  EXPECT_NE(a[0].values(), d[0].values());
}

TEST(SampleNear, EnergiesApproachCriticalValue) {
  const Grid1D g(0.0, 1.0, 29);
  const auto e = allen_cahn_model(g);
  const auto c = mass_constraint(g, 0.0);
  const double e0 = e->energy(Field(g));
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {1e-1, 1e-2, 1e-3}) {
    double worst = 0.0;
    for (const Field& u : sample_near(*e, *c, Field(g), r, 10, 1)) worst = std::max(worst, std::abs(e->energy(u) - e0));
    EXPECT_LT(worst, prev);
    prev = worst;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(FitExponent, MonomialsRecoverExactTheta) {
  for (int p : {1, 2, 3}) {
    const auto e = monomial_model(p);
    const auto c = no_constraint(e->grid());
    const Field origin(e->grid());
    const auto samples = sample_near(*e, *c, origin, 0.5, 32, 3);
    const LojaFit f = fit_exponent(*e, *c, origin, samples);
    EXPECT_NEAR(f.theta, 1.0 / (2 * p), 1e-12) << "p = " << p;
    EXPECT_TRUE(f.in_range_flag);
  }
}

TEST(FitExponent, ClosedFormPairs) {
  std::vector<double> gaps, grads;
  for (int k = 1; k <= 8; ++k) {
    const double x = std::pow(10.0, -0.25 * k);
    gaps.push_back(x * x * x * x);
    grads.push_back(4 * x * x * x);
  }
  const LojaFit f = fit_exponent_from(gaps, grads);
  EXPECT_NEAR(f.slope, 0.75, 1e-12);
  EXPECT_NEAR(f.theta, 0.25, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  // C is the max ratio, here constant: x^3 / (4 x^3)
  EXPECT_NEAR(f.C, 0.25, 1e-12);
}

TEST(FitExponent, RefusesSmallOrFlatSets) {
  std::vector<double> gaps(7, 1.0), grads(7, 1.0);
  EXPECT_THROW(fit_exponent_from(gaps, grads), Error);
  std::vector<double> flat_g, flat_d;
  for (int k = 0; k < 10; ++k) {
    flat_g.push_back(1.0 + 0.1 * k);
    flat_d.push_back(1.0);
  }
  try {
    fit_exponent_from(flat_g, flat_d);
    FAIL() << "expected ill_conditioned_fit";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::ill_conditioned_fit);
  }
}

TEST(FitExponent, AllenCahnNondegenerateMinimum) {
  const Grid1D g(0.0, 1.0, 99);
  const auto e = allen_cahn_model(g);
  const auto c = mass_constraint(g, 0.0);
  const Field ub(g);
  const auto samples = sample_near(*e, *c, ub, 1e-2, 64, 42);
  const LojaFit f = fit_exponent(*e, *c, ub, samples);
  EXPECT_GE(f.theta, 0.45);
  EXPECT_LE(f.theta, 0.55);
  // the fitted constant certifies every sample; the projected gradient never exceeds the full one
  const double e0 = e->energy(ub);
  for (const Field& u : samples) {
    const double gap = std::abs(e->energy(u) - e0);
    const double pg = norm(project_tangent(*e, *c, u));
    EXPECT_LE(std::pow(gap, 1 - f.theta), (1 + 1e-9) * f.C * pg);
    EXPECT_LE(pg, (1 + 1e-12) * norm(e->h_gradient(u)));
  }
}

TEST(FitExponent, CylinderRefinedAndPlain) {
  const Grid1D g(0.0, 1.0, 99);
  const auto e = revolution_model(g);
  const auto c = revolution_volume_constraint(g, pi);
  const Field ub(g);
  const auto samples = sample_near(*e, *c, ub, 1e-4, 64, 9);
  const LojaFit refined = fit_exponent(*e, *c, ub, samples);
  EXPECT_GE(refined.theta, 0.45);
  EXPECT_LE(refined.theta, 0.55);
  // the full gradient does not vanish at a constrained critical point
  const LojaFit plain = fit_exponent(*e, *c, ub, samples, false);
  EXPECT_FALSE(plain.in_range_flag);
}

TEST(BestConstant, ClosedFormValues) {
  EXPECT_NEAR(best_constant(SeqQuadModel::with_rule(10, LambdaRule::geometric), 0.5, 0.1), std::pow(2.0, 4.5),
              1e-6 * std::pow(2.0, 4.5));
  EXPECT_NEAR(best_constant(SeqQuadModel::with_rule(20, LambdaRule::geometric), 0.5, 0.1), 724.0773439350247,
              1e-6 * 724.08);
  EXPECT_NEAR(best_constant(SeqQuadModel::with_rule(1, LambdaRule::geometric), 0.5, 0.1), 1.0, 1e-12);
  // random directions never beat the softest coordinate direction
  const SeqQuadModel m = SeqQuadModel::with_rule(8, LambdaRule::inverse_square);
  const double c = best_constant(m, 0.5, 1.0);
  EXPECT_NEAR(c, 8.0 / std::sqrt(2.0), 1e-12 * c);
}

TEST(BestConstant, SmallerThetaGrowsWithSigma) {
  const SeqQuadModel m = SeqQuadModel::with_rule(4, LambdaRule::geometric);
  // theta < 1/2: the ratio scales like t^(1 - 2 theta), largest at the largest amplitude
  const double c1 = best_constant(m, 0.25, 1.0);
  const double c2 = best_constant(m, 0.25, 0.01);
  EXPECT_NEAR(c1 / c2, std::pow(100.0, 0.5), 1e-9 * c1 / c2);
}

TEST(Blowup, GeometricRatios) {
  std::vector<std::size_t> Ns;
  for (std::size_t n = 2; n <= 20; n += 2) Ns.push_back(n);
  const auto rows = blowup_sweep(Ns, LambdaRule::geometric, 0.5, 0.1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].C, std::pow(2.0, (rows[i].N - 1) / 2.0), 1e-6 * rows[i].C);
    if (i > 0) {
      EXPECT_GT(rows[i].C, rows[i - 1].C);
      EXPECT_NEAR(rows[i].ratio, 2.0, 1e-6);
    }
  }
}

TEST(Blowup, InverseSquareGrowsLinearly) {
  const auto rows = blowup_sweep({3, 5, 9, 17}, LambdaRule::inverse_square, 0.5, 0.1);
  for (const auto& r : rows) EXPECT_NEAR(r.C / static_cast<double>(r.N), 1.0 / std::sqrt(2.0), 1e-6);
}

TEST(Blowup, ChartRouteMatchesDirect) {
  const std::vector<std::size_t> Ns{2, 5, 8, 12};
  const auto direct = blowup_sweep(Ns, LambdaRule::geometric, 0.5, 0.1);
  const auto chart = blowup_sweep(Ns, LambdaRule::geometric, 0.5, 0.1, BlowupRoute::chart);
  for (std::size_t i = 0; i < Ns.size(); ++i) EXPECT_NEAR(chart[i].C, direct[i].C, 1e-8 * direct[i].C);
}

TEST(Blowup, ThreadedSweepIsIdentical) {
  std::vector<std::size_t> Ns;
  for (std::size_t n = 1; n <= 16; ++n) Ns.push_back(n);
  const auto a = blowup_sweep(Ns, LambdaRule::inverse_square, 0.5, 0.1, BlowupRoute::chart, 1);
  const auto b = blowup_sweep(Ns, LambdaRule::inverse_square, 0.5, 0.1, BlowupRoute::chart, 4);
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    EXPECT_EQ(a[i].C, b[i].C);
    EXPECT_EQ(a[i].ratio, b[i].ratio);
  }
}

TEST(Blowup, RejectsBadLists) {
  EXPECT_THROW(blowup_sweep({}, LambdaRule::geometric, 0.5, 0.1), Error);
  EXPECT_THROW(blowup_sweep({4, 2}, LambdaRule::geometric, 0.5, 0.1), Error);
}

TEST(HessianReport, AllenCahnMass) {
  const Grid1D g(0.0, 1.0, 49);
  const auto e = allen_cahn_model(g);
  const auto c = mass_constraint(g, 0.0);
  const HessianReport r = hessian_report(build_chart(*c, Field(g)), *e, *c);
  EXPECT_EQ(r.kernel_dim, 0u);
  EXPECT_TRUE(r.index_zero_analog);
  EXPECT_NEAR(r.eigenvalues.front(), discrete_dirichlet_eigenvalue(g, 2) - 1.0, 1e-5 * r.spectral_radius);
}

TEST(HessianReport, Cylinder) {
  const Grid1D g(0.0, 1.0, 49);
  const auto e = revolution_model(g);
  const auto c = revolution_volume_constraint(g, pi);
  const HessianReport r = hessian_report(build_chart(*c, Field(g)), *e, *c);
  EXPECT_EQ(r.kernel_dim, 0u);
  EXPECT_NEAR(r.eigenvalues.front(), 2 * pi * (discrete_dirichlet_eigenvalue(g, 2) - 1.0), 1e-5 * r.spectral_radius);
}

TEST(HessianReport, ExplicitKernel) {
  const auto e = diagonal_quadratic_model({1.0, 0.5, 0.0, 0.25});
  const auto c = no_constraint(e->grid());
  const HessianReport r = hessian_report(build_chart(*c, Field(e->grid())), *e, *c);
  EXPECT_EQ(r.kernel_dim, 1u);
  EXPECT_NEAR(r.eigenvalues[1], 0.25, 1e-9);
}
