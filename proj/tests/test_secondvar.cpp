#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jetvar/secondvar.hpp"
#include "support.hpp"

using namespace jetvar;
using jetvar::testing::N;

namespace {

const JetBundle Y = JetBundle({"t"}, {"y"}, 1);

Lagrangian lag(const JetBundle& b, const std::string& L) { return {b, N(b, L)}; }
std::string P(const Expr& e) { return to_plain(e); }

Lagrangian oscillator() { return lag(Y, "1/2*y_t^2 - 1/2*y^2"); }
Lagrangian free_particle() { return lag(Y, "1/2*y_t^2"); }

Expr route_difference(const Lagrangian& lambda) {
  auto v = adjoin_variation(lambda.bundle);
  Lagrangian lp{v.product, lambda.density};
  Expr iterated = variational_derivative(lp, adjoined_field(v, lambda.bundle.m()), 2);
  return normalize(iterated - second_variation(lambda, v));
}

bool el_vanishes(const JetBundle& b, const Expr& density) {
  for (const auto& c : euler_lagrange({b, density}).components)
    if (!c.is_zero()) return false;
  return true;
}

// The equator th = pi/2, ph = t on the unit sphere with variation (a, b).
std::map<int, Expr> equator(const JetBundle& product, const std::string& a, const std::string& b) {
  return {{0, N(product, "pi/2")}, {1, N(product, "t")}, {2, N(product, a)}, {3, N(product, b)}};
}

}  // namespace

TEST(VariationalDerivative, Examples) {
  auto osc = oscillator();
  EXPECT_TRUE(variational_derivative(osc, {{Expr(1)}, {Expr(0)}}, 1).is_zero());
  EXPECT_EQ(P(variational_derivative(free_particle(), {{Expr(0)}, {N(Y, "y")}}, 1)), "y_t^2");

  auto v = adjoin_variation(Y);
  Lagrangian lp{v.product, osc.density};
  Expr d2 = variational_derivative(lp, adjoined_field(v, 1), 2);
  EXPECT_EQ(P(d2), "eta_t^2 - eta^2");
  EXPECT_THROW(variational_derivative(osc, {{Expr(1)}, {Expr(0)}}, 3), Error);
}

TEST(VariationalDerivative, CommutesWithEulerLagrange) {
  JetBundle b({"t"}, {"y"}, 2);
  ProjectableVectorField scale{{N(b, "t^2")}, {N(b, "y^2 + t")}};
  for (const auto* text : {"1/2*y_t^2 - V(y)", "y_tt^2 + t*y*y_t", "sin(y)*y_t^3"}) {
    Lagrangian lambda = lag(b, text);
    auto lhs = variational_derivative(b, euler_lagrange(lambda), scale, 1);
    auto rhs = euler_lagrange({b, variational_derivative(lambda, scale, 1)});
    EXPECT_TRUE(equivalent(lhs.components[0], rhs.components[0])) << text;
  }
}

TEST(SecondVariation, Examples) {
  auto v = adjoin_variation(Y);
  EXPECT_EQ(P(second_variation(oscillator(), v)), "-(eta*eta_tt + eta^2)");
  EXPECT_EQ(P(second_variation(free_particle(), v)), "-(eta*eta_tt)");

  JetBundle flat({"t"}, {"q1", "q2"}, 1);
  auto g = make_metric({"q1", "q2"}, {{Expr(1), Expr(0)}, {Expr(0), Expr(1)}});
  auto vg = adjoin_variation(g.bundle);
  EXPECT_TRUE(equivalent(second_variation(geodesic_energy(g), vg), N(vg.product, "-eta1*eta1_tt - eta2*eta2_tt")));
}

TEST(SecondVariation, RouteEquality) {
  for (const auto& lambda : {oscillator(), free_particle(), geodesic_energy(jetvar::testing::sphere())}) {
    auto v = adjoin_variation(lambda.bundle);
    EXPECT_TRUE(el_vanishes(v.product, route_difference(lambda))) << P(lambda.density);
  }
}

TEST(Deform, Oscillator) {
  auto v = adjoin_variation(Y);
  auto d = deform(oscillator(), v);
  EXPECT_EQ(P(d.raw), "-(y_tt*eta + y*eta)");
  EXPECT_EQ(P(d.integrated), "y_t*eta_t - y*eta");
  EXPECT_TRUE(el_vanishes(v.product, normalize(d.raw - d.integrated)));
}

TEST(Deform, NullLagrangian) {
  auto v = adjoin_variation(Y);
  auto d = deform({Y, total_derivative(Y, N(Y, "y^2*t"), 0)}, v);
  EXPECT_TRUE(d.raw.is_zero());
}

TEST(Deform, GeodesicEnergyMatchesChristoffelForm) {
  for (const auto& g : {jetvar::testing::sphere(), jetvar::testing::generic_metric()}) {
    auto v = adjoin_variation(g.bundle);
    auto d = deform(geodesic_energy(g), v);
    auto gamma = christoffel(g);
    const auto& b = v.product;
    std::vector<Expr> terms;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Expr inner = b.coord(2 + i, MultiIndex({1}));
        for (int m = 0; m < 2; ++m)
          for (int k = 0; k < 2; ++k) inner = inner + gamma[i][m][k] * b.coord(m, MultiIndex({1})) * b.field(2 + k);
        terms.push_back(g.g[i][j] * inner * b.coord(j, MultiIndex({1})));
      }
    EXPECT_TRUE(equivalent(d.integrated, Expr::add(terms)));
    EXPECT_TRUE(el_vanishes(b, normalize(d.raw - d.integrated)));
  }
}

TEST(Deform, BoundToLiftedField) {
  ProjectableVectorField dt{{Expr(1)}, {Expr(0)}};
  auto lambda = lag(Y, "1/2*y_t^2 - V(y)");
  auto d = deform(lambda, Y, bind_variation(Y, dt));
  // Time translation is a symmetry: omega is a total derivative.
  EXPECT_TRUE(el_vanishes(Y, d.raw));
}

TEST(Jacobi, Examples) {
  auto j = jacobi(oscillator());
  EXPECT_EQ(P(j.components[0]), "-(eta_tt + eta)");
  EXPECT_EQ(P(jacobi(free_particle()).components[0]), "-eta_tt");
}

TEST(Jacobi, IsTheDirectionalDerivativeOfEulerLagrange) {
  auto g = jetvar::testing::sphere();
  auto lambda = geodesic_energy(g);
  auto sys = jacobi(lambda);
  const auto& b = sys.bundle;
  Expr gamma_th = N(b, "1 + 1/5*sin(t)"), gamma_ph = N(b, "t^2/3"), eta_th = N(b, "cos(2*t)"), eta_ph = N(b, "t");
  Expr eps = Expr::parameter("eps");
  auto E = euler_lagrange(lambda).components;
  std::map<int, Expr> base{{0, gamma_th}, {1, gamma_ph}};
  std::map<int, Expr> moved{{0, gamma_th + eps * eta_th}, {1, gamma_ph + eps * eta_ph}};
  std::map<int, Expr> both{{0, gamma_th}, {1, gamma_ph}, {2, eta_th}, {3, eta_ph}};
  for (int k = 0; k < 2; ++k) {
    Expr j = pullback(b, sys.components[k], both);
    Expr e0 = pullback(g.bundle, E[k], base), e1 = pullback(g.bundle, E[k], moved);
    std::vector<double> errs, steps;
    for (double h : {1e-3, 1e-4, 1e-5, 1e-6}) {
      Env env;
      env.set("t", 0.7).set("eps", h);
      double err = std::abs(eval(j, env) - (eval(e1, env) - eval(e0, env)) / h);
      errs.push_back(std::log10(std::max(err, 1e-300)));
      steps.push_back(std::log10(h));
    }
    // Least-squares slope over the first three steps (the last is at round-off).
    double mx = 0, my = 0;
    for (int i = 0; i < 3; ++i) mx += steps[i] / 3, my += errs[i] / 3;
    double num = 0, den = 0;
    for (int i = 0; i < 3; ++i) num += (steps[i] - mx) * (errs[i] - my), den += (steps[i] - mx) * (steps[i] - mx);
    EXPECT_GE(num / den, 0.9) << k;
  }
}

TEST(Jacobi, SelfAdjointAlongCriticalSections) {
  // J read along the critical section as an operator on eta alone.
  auto g = jetvar::testing::sphere();
  auto sys = jacobi(geodesic_energy(g));
  JetBundle eta_only({"t"}, {"eta1", "eta2"}, 1);
  SourceForm along;
  for (const auto& c : sys.components) {
    Expr pulled = pullback(sys.bundle, c, {{0, N(sys.bundle, "pi/2")}, {1, N(sys.bundle, "t")}});
    along.components.push_back(N(eta_only, P(pulled)));
  }
  EXPECT_TRUE(helmholtz_check(eta_only, along).pass);

  auto osc = jacobi(oscillator());
  JetBundle eta({"t"}, {"eta"}, 1);
  EXPECT_TRUE(helmholtz_check(eta, SourceForm{{N(eta, P(osc.components[0]))}}).pass);
}

TEST(Bianchi, OscillatorReproducesJacobi) {
  auto v = adjoin_variation(Y);
  auto bi = bianchi(oscillator(), v);
  EXPECT_EQ(P(bi.beta[0]), "-(eta_tt + eta)");
  // eta J = eta beta + d_H(remainder)
  auto j = jacobi(oscillator(), v);
  EXPECT_TRUE(equivalent(v.eta.components[0] * j.components[0],
                         v.eta.components[0] * bi.beta[0] + divergence(v.product, bi.remainder)));
}

TEST(Bianchi, VanishesWhenEulerLagrangeDoes) {
  auto v = adjoin_variation(Y);
  auto bi = bianchi({Y, total_derivative(Y, N(Y, "sin(y)"), 0)}, v);
  EXPECT_TRUE(bi.beta[0].is_zero());
}

TEST(KernelTest, GreatCircleBindings) {
  auto g = jetvar::testing::sphere();
  auto lambda = geodesic_energy(g);
  auto v = adjoin_variation(g.bundle);
  auto sys = jacobi(lambda, v);
  auto bi = bianchi(lambda, v);

  auto normal = equator(v.product, "sin(t)", "0");
  auto along = equator(v.product, "0", "t");
  auto constant = equator(v.product, "1", "0");

  auto r1 = jacobi_kernel_test(sys, normal);
  EXPECT_TRUE(r1.in_kernel);
  EXPECT_TRUE(r1.symbolic);
  EXPECT_TRUE(jacobi_kernel_test(sys, along).in_kernel);
  auto r3 = jacobi_kernel_test(sys, constant);
  EXPECT_FALSE(r3.in_kernel);
  EXPECT_GE(r3.numeric.max_residual, 1e-2);

  EXPECT_TRUE(vanishes_along(v.product, bi.beta, normal).in_kernel);
  EXPECT_TRUE(vanishes_along(v.product, bi.beta, along).in_kernel);
  EXPECT_FALSE(vanishes_along(v.product, bi.beta, constant).in_kernel);
}

TEST(StrongCurrent, Oscillator) {
  auto v = adjoin_variation(Y);
  auto h = strong_current(oscillator(), v);
  EXPECT_TRUE(h.components[0].is_zero());
  AdjoinedVariation zero{v.product, {{Expr(0)}}};
  EXPECT_TRUE(strong_current(oscillator(), zero).components[0].is_zero());
}

TEST(StrongCurrent, DivergenceLiesInTheJacobiIdeal) {
  for (const auto& g : {jetvar::testing::sphere(), jetvar::testing::generic_metric()}) {
    auto lambda = geodesic_energy(g);
    auto v = adjoin_variation(g.bundle);
    auto h = strong_current(lambda, v);
    Expr div = divergence(v.product, h);
    auto sys = jacobi(lambda, v);
    OnShell jacobi_shell(v.product, sys.components, std::vector<int>{2, 3});
    EXPECT_TRUE(jacobi_shell.reduce(div).is_zero());
  }
}
