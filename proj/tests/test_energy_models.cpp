#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lojalab/energy_models.hpp"
#include "test_support.hpp"

using namespace lojalab;
using namespace lojalab::testing;
using std::numbers::pi;

namespace {

const Grid1D kUnit(0.0, 1.0, 199);

double sup_diff(const Field& f, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(f[i] - exact(f.grid().node(i))));
  return e;
}

struct Smooth {
  // u = A sin(pi x) + B sin(2 pi x) on [0,1]
  double A = 0.1;
  double B = 0.05;
  double u(double x) const { return A * std::sin(pi * x) + B * std::sin(2 * pi * x); }
  double du(double x) const { return A * pi * std::cos(pi * x) + 2 * pi * B * std::cos(2 * pi * x); }
  double ddu(double x) const {
    return -A * pi * pi * std::sin(pi * x) - 4 * pi * pi * B * std::sin(2 * pi * x);
  }
};

// Closed-form L^2 gradients of the continuum energies.
double graph_area_gradient(const Smooth& s, double x) {
  const double p = s.du(x);
  return -s.ddu(x) / std::pow(1 + p * p, 1.5);
}

double allen_cahn_gradient(const Smooth& s, double x) {
  const double u = s.u(x);
  return -s.ddu(x) + u * u * u - u;
}

// First variation of 2 pi int (1+u) sqrt(1+u'^2):
// 2 pi [ sqrt(1+u'^2) - ((1+u) u'/sqrt(1+u'^2))' ]
double revolution_gradient(const Smooth& s, double x) {
  const double p = s.du(x);
  const double w = std::sqrt(1 + p * p);
  return 2 * pi * (w - (p * p / w + (1 + s.u(x)) * s.ddu(x) / (w * w * w)));
}

double observed_order(const std::function<double(std::size_t)>& err) {
  const double e1 = err(99);
  const double e2 = err(199);
  const double e3 = err(399);
  return std::min(std::log2(e1 / e2), std::log2(e2 / e3));
}

}  // namespace

TEST(Revolution, CylinderValues) {
  EnergyPtr e = revolution_model(kUnit);
  Field zero(kUnit);
  EXPECT_NEAR(e->energy(zero), 2 * pi, 1e-13);
  Field g = e->h_gradient(zero);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], 2 * pi, 1e-12);
}

TEST(Revolution, EnergyMatchesQuadratureOracle) {
  EnergyPtr e = revolution_model(kUnit);
  Field u = Field::sample(kUnit, [](double x) { return 0.1 * std::sin(pi * x); });
  const double oracle = adaptive_simpson(
      [](double x) {
        const double p = 0.1 * pi * std::cos(pi * x);
        return 2 * pi * (1 + 0.1 * std::sin(pi * x)) * std::sqrt(1 + p * p);
      },
      0.0, 1.0);
  EXPECT_NEAR(e->energy(u) / oracle, 1.0, 1e-3);
}

TEST(Revolution, InadmissibleFieldIsDomainError) {
  EnergyPtr e = revolution_model(Grid1D(0.0, 1.0, 9));
  Field u(e->grid());
  u[4] = -1.5;
  EXPECT_FALSE(e->admissible(u));
  try {
    e->energy(u);
    FAIL() << "expected domain error";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::domain_error);
    EXPECT_NE(std::string(err.what()).find("node 4"), std::string::npos);
  }
  EXPECT_THROW(e->h_gradient(u), Error);
}

TEST(GraphArea, FlatGraph) {
  EnergyPtr e = graph_area_model(kUnit);
  EXPECT_NEAR(e->energy(Field(kUnit)), 1.0, 1e-14);
  EXPECT_EQ(e->h_gradient(Field(kUnit)).max_abs(), 0.0);
}

TEST(GraphArea, ParabolaQuadratureAndGradientOrder) {
  auto u_of = [](double x) { return 0.2 * x * (1 - x); };
  EnergyPtr e = graph_area_model(kUnit);
  const double oracle = adaptive_simpson(
      [](double x) {
        const double p = 0.2 * (1 - 2 * x);
        return std::sqrt(1 + p * p);
      },
      0.0, 1.0);
  EXPECT_NEAR(e->energy(Field::sample(kUnit, u_of)) / oracle, 1.0, 1e-3);

  auto err = [&](std::size_t n) {
    Grid1D g(0.0, 1.0, n);
    Field grad = graph_area_model(g)->h_gradient(Field::sample(g, u_of));
    return sup_diff(grad, [](double x) {
      const double p = 0.2 * (1 - 2 * x);
      return 0.4 / std::pow(1 + p * p, 1.5);
    });
  };
  EXPECT_GE(std::log2(err(99) / err(199)), 1.9);
}

TEST(AllenCahn, ZeroState) {
  EnergyPtr e = allen_cahn_model(kUnit);
  Field zero(kUnit);
  EXPECT_NEAR(e->energy(zero), 0.25, 1e-15);
  EXPECT_EQ(e->h_gradient(zero).max_abs(), 0.0);
  std::mt19937_64 rng(1);
  Field v = random_field(rng, kUnit);
  Field hv = e->hessian_apply(zero, v);
  Field expected = -1.0 * d2(v) - v;
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(hv[i], expected[i], 1e-9 * (1 + std::abs(expected[i])));
}

TEST(ContinuumConsistency, SecondOrderForAllGridEnergies) {
  const Smooth s;
  struct Case {
    const char* name;
    EnergyPtr (*make)(const Grid1D&);
    double (*exact)(const Smooth&, double);
  };
  const Case cases[] = {{"graph_area", graph_area_model, graph_area_gradient},
                        {"allen_cahn", allen_cahn_model, allen_cahn_gradient},
                        {"revolution", revolution_model, revolution_gradient}};
  for (const Case& c : cases) {
    auto err = [&](std::size_t n) {
      Grid1D g(0.0, 1.0, n);
      Field grad = c.make(g)->h_gradient(Field::sample(g, [&](double x) { return s.u(x); }));
      return sup_diff(grad, [&](double x) { return c.exact(s, x); });
    };
    EXPECT_GE(observed_order(err), 1.9) << c.name;
  }
}

TEST(ExactGradient, AllModelsRandomDirections) {
  std::mt19937_64 rng(42);
  Grid1D g(0.0, 1.0, 31);
  std::vector<EnergyPtr> models{revolution_model(g), graph_area_model(g), allen_cahn_model(g),
                                seq_quad_model(SeqQuadModel::with_rule(12, LambdaRule::geometric)),
                                constraint_hessian_example_model(6, {0.5, 0.25, 0.125, 0.1, 0.05, 0.02}).first};
  for (const EnergyPtr& e : models) {
    for (int trial = 0; trial < 20; ++trial) {
      Field u = random_field(rng, e->grid(), 0.1);
      Field v = random_field(rng, e->grid(), 1.0);
      Field w = random_field(rng, e->grid(), 1.0);
      ASSERT_TRUE(e->admissible(u));
      const double fd = directional_fd(*e, u, v, 1e-5);
      EXPECT_NEAR(inner(e->h_gradient(u), v), fd, 1e-6 * (1 + std::abs(e->energy(u)))) << e->name();

      const double a = inner(e->hessian_apply(u, v), w);
      const double b = inner(v, e->hessian_apply(u, w));
      EXPECT_NEAR(a, b, 1e-9 * std::max({std::abs(a), std::abs(b), 1e-300}) + 1e-12) << e->name();

      const double eps = 1e-5;
      Field up = u;
      up.axpy(eps, v);
      Field um = u;
      um.axpy(-eps, v);
      Field fdh = (1.0 / (2 * eps)) * (e->h_gradient(up) - e->h_gradient(um));
      Field hv = e->hessian_apply(u, v);
      EXPECT_LE(norm(fdh - hv), 1e-5 * (1 + norm(hv))) << e->name();
    }
  }
}

TEST(IntegralConstraint, MassAndSquare) {
  ConstraintPtr mass = mass_constraint(kUnit, 0.0);
  Field zero(kUnit);
  EXPECT_EQ(mass->value(zero)[0], 0.0);
  Field g = mass->h_gradients(zero)[0];
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g[i], 1.0);

  Field s2 = Field::sample(kUnit, [](double x) { return std::sin(2 * pi * x); });
  EXPECT_LT(std::abs(mass->value(s2)[0]), 1e-12);

  // trapezoid over the nodes: the two boundary nodes carry u = 0
  const double c = 0.3;
  const double target = 0.01;
  ConstraintPtr sq = integral_constraint(kUnit, ScalarFunction::square(), target);
  Field cf = Field::constant(kUnit, c);
  EXPECT_NEAR(sq->value(cf)[0], kUnit.h() * kUnit.n() * c * c - target, 1e-15);
  Field g2 = sq->h_gradients(cf)[0];
  for (std::size_t i = 0; i < g2.size(); ++i) EXPECT_NEAR(g2[i], 2 * c, 1e-15);
}

TEST(VolumeConstraint, CylinderAndSineBump) {
  ConstraintPtr vol = revolution_volume_constraint(kUnit, pi);
  Field zero(kUnit);
  EXPECT_NEAR(vol->value(zero)[0], 0.0, 1e-14);
  Field g = vol->h_gradients(zero)[0];
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], 2 * pi, 1e-15);

  // pi * int (2u + u^2) with int sin = 2/pi, int sin^2 = 1/2
  const double closed = pi * (0.2 * 2 / pi + 0.01 * 0.5);
  const double oracle = adaptive_simpson(
      [](double x) {
        const double u = 0.1 * std::sin(pi * x);
        return pi * (1 + u) * (1 + u) - pi;
      },
      0.0, 1.0);
  EXPECT_NEAR(oracle, closed, 1e-10);
  EXPECT_NEAR(closed, 0.41571, 1e-5);

  Grid1D fine(0.0, 1.0, 999);
  auto bump = [](double x) { return 0.1 * std::sin(pi * x); };
  EXPECT_NEAR(revolution_volume_constraint(fine, pi)->value(Field::sample(fine, bump))[0], closed, 1e-6);
  EXPECT_NEAR(vol->value(Field::sample(kUnit, bump))[0], closed, 2e-5);
}

TEST(ConstraintGradients, ExactForAllConstraints) {
  std::mt19937_64 rng(8);
  Grid1D g(0.0, 2.0, 25);
  std::vector<ConstraintPtr> cs{mass_constraint(g, 0.3), integral_constraint(g, ScalarFunction::cube(), 0.1),
                                revolution_volume_constraint(g, 2 * pi),
                                constraint_hessian_example_model(4, {0.5, 0.25, 0.125, 0.0625}).second,
                                sphere_toy_model(5).second};
  for (const ConstraintPtr& c : cs) {
    for (int trial = 0; trial < 20; ++trial) {
      Field u = random_field(rng, c->grid(), 0.3);
      Field v = random_field(rng, c->grid());
      const double eps = 1e-5;
      Field up = u;
      up.axpy(eps, v);
      Field um = u;
      um.axpy(-eps, v);
      const double fd = (c->value(up)[0] - c->value(um)[0]) / (2 * eps);
      EXPECT_NEAR(inner(c->h_gradients(u)[0], v), fd, 1e-7 * (1 + std::abs(fd))) << c->name();
      Field fdh = (1.0 / (2 * eps)) * (c->h_gradients(up)[0] - c->h_gradients(um)[0]);
      EXPECT_LE(norm(fdh - c->hessian_apply(u, 0, v)), 1e-6 * (1 + norm(fdh))) << c->name();
    }
  }
}

TEST(SeqQuad, ClosedForms) {
  SeqQuadModel m = SeqQuadModel::with_rule(10, LambdaRule::geometric);
  std::vector<double> zero(10, 0.0);
  EXPECT_EQ(seq_quad_energy(m, zero), 0.0);
  EXPECT_EQ(norm2(seq_quad_gradient(m, zero)), 0.0);
  for (std::size_t n = 1; n <= 10; ++n) {
    for (double t : {0.1, 0.01}) {
      std::vector<double> x(10, 0.0);
      x[n - 1] = t;
      const double E = seq_quad_energy(m, x);
      const double G = norm2(seq_quad_gradient(m, x));
      EXPECT_NEAR(E, 0.5 * std::ldexp(1.0, -static_cast<int>(n)) * t * t, 1e-18);
      EXPECT_NEAR(G, std::ldexp(1.0, -static_cast<int>(n)) * t, 1e-18);
      EXPECT_NEAR(std::sqrt(E) / G, std::pow(2.0, (n - 1) / 2.0), 1e-9 * std::pow(2.0, n / 2.0));
    }
  }
  SeqQuadModel inv = SeqQuadModel::with_rule(4, LambdaRule::inverse_square);
  EXPECT_DOUBLE_EQ(inv.lambda[3], 1.0 / 16.0);
}

TEST(ConstraintHessianExample, OriginAndGraphPoints) {
  std::vector<double> lambda{0.5, 0.25, 0.125};
  auto [E, G] = constraint_hessian_example_model(3, lambda);
  Field origin(E->grid());
  EXPECT_EQ(E->energy(origin), 0.0);
  EXPECT_EQ(G->value(origin)[0], 0.0);
  Field g = G->h_gradients(origin)[0];
  EXPECT_EQ(g[0], 1.0);
  for (std::size_t k = 1; k < g.size(); ++k) EXPECT_EQ(g[k], 0.0);

  // on the graph x_0 = psi(x'), E = sum lambda_n x'_n^2
  const double t = 0.3;
  for (std::size_t n = 1; n <= 3; ++n) {
    Field x(E->grid());
    x[n] = t;
    x[0] = (lambda[n - 1] - 1) * t * t;
    EXPECT_NEAR(G->value(x)[0], 0.0, 1e-16);
    EXPECT_NEAR(E->energy(x), lambda[n - 1] * t * t, 1e-15);
  }
}

TEST(Monomial, Derivatives) {
  EnergyPtr e = monomial_model(2);
  Field x(e->grid(), {0.5});
  EXPECT_DOUBLE_EQ(e->energy(x), 0.0625);
  EXPECT_DOUBLE_EQ(e->h_gradient(x)[0], 0.5);
  Field v(e->grid(), {1.0});
  EXPECT_DOUBLE_EQ(e->hessian_apply(x, v)[0], 3.0);
}
