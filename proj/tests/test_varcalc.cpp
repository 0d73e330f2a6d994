#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jetvar/varcalc.hpp"
#include "support.hpp"

using namespace jetvar;
using jetvar::testing::N;
using jetvar::testing::parse;

namespace {

const JetBundle Y = JetBundle({"t"}, {"y"}, 1);
const JetBundle XT = JetBundle({"x", "t"}, {"y"}, 1);
const JetBundle Y2 = JetBundle({"t"}, {"y", "z"}, 1);

Lagrangian lag(const JetBundle& b, const std::string& L) { return {b, N(b, L)}; }

std::string P(const Expr& e) { return to_plain(e); }

Env potential_env() {
  Env env;
  // V = y^2/2 + y^4/4
  env.functions["V"] = [](std::span<const double> a, std::span<const int> d) {
    double x = a[0];
    switch (d[0]) {
      case 0: return x * x / 2 + x * x * x * x / 4;
      case 1: return x + x * x * x;
      case 2: return 1 + 3 * x * x;
      case 3: return 6 * x;
      case 4: return 6.0;
      default: return 0.0;
    }
  };
  return env;
}

// Random polynomial density in the jets of y up to the given order.
Expr random_density(const JetBundle& b, int order, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-3, 3), pick(0, 100);
  std::vector<Expr> atoms{b.base(0)};
  for (int i = 0; i < b.m(); ++i)
    for (const auto& a : multi_indices(b.n(), order)) atoms.push_back(b.coord(i, a));
  std::vector<Expr> terms;
  for (int k = 0; k < 4; ++k) {
    Expr t = Expr(coef(rng));
    int factors = 1 + pick(rng) % 3;
    for (int f = 0; f < factors; ++f) t = t * atoms[pick(rng) % atoms.size()];
    terms.push_back(t);
  }
  return normalize(Expr::add(std::move(terms)));
}

}  // namespace

TEST(EulerLagrange, Oscillator) {
  auto e = euler_lagrange(lag(Y, "1/2*y_t^2 - 1/2*y^2"));
  ASSERT_EQ(e.components.size(), 1u);
  EXPECT_EQ(P(e.components[0]), "-(y_tt + y)");
}

TEST(EulerLagrange, TotalDivergenceIsNull) {
  auto L = total_derivative(Y, N(Y, "y^2"), 0);
  EXPECT_TRUE(euler_lagrange({Y, L}).components[0].is_zero());
}

TEST(EulerLagrange, SphereEnergyIsGeodesicEquation) {
  auto g = jetvar::testing::sphere();
  auto e = euler_lagrange(geodesic_energy(g));
  auto expected = geodesic_equations(g, christoffel(g));
  for (int k = 0; k < 2; ++k) EXPECT_TRUE(equivalent(e.components[k], expected[k])) << P(e.components[k]);
  EXPECT_EQ(P(e.components[0]), P(N(g.bundle, "-th_tt + cos(th)*sin(th)*ph_t^2")));
}

TEST(EulerLagrange, GenericMetricEnergy) {
  auto g = jetvar::testing::generic_metric();
  auto e = euler_lagrange(geodesic_energy(g));
  auto expected = geodesic_equations(g, christoffel(g));
  for (int k = 0; k < 2; ++k) EXPECT_TRUE(equivalent(e.components[k], expected[k]));
}

TEST(EulerLagrange, MatchesFiniteVariationOfTheAction) {
  Lagrangian lambda = lag(Y, "1/2*y_t^2 - 1/2*y^2");
  Expr section = N(Y, "sin(13/10*t) + 1/5*t^2");
  Expr E = pullback(Y, euler_lagrange(lambda).components[0], {{0, section}});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> c(-1, 1);
  const int steps = 2000;
  auto simpson = [&](const std::function<double(double)>& f) {
    double h = 1.0 / steps, s = f(0) + f(1);
    for (int k = 1; k < steps; ++k) s += f(k * h) * (k % 2 ? 4 : 2);
    return s * h / 3;
  };
  Expr eps = Expr::parameter("eps");
  for (int trial = 0; trial < 20; ++trial) {
    // (t (1 - t))^3 (a + b t + c t^2) vanishes to second order at the ends.
    Expr bump = N(Y, "(t*(1 - t))^3") * (Expr(Rational(std::lround(c(rng) * 100), 100)) +
                                          Expr(Rational(std::lround(c(rng) * 100), 100)) * Y.base(0) +
                                          Expr(Rational(std::lround(c(rng) * 100), 100)) * pow(Y.base(0), 2));
    Expr varied = pullback(Y, lambda.density, {{0, section + eps * bump}});
    auto action = [&](double e) {
      return simpson([&](double t) { return eval(varied, Env().set("t", t).set("eps", e)); });
    };
    double h = 1e-4;
    double fd = (action(h) - action(-h)) / (2 * h);
    double exact = simpson([&](double t) { return eval(E * bump, Env().set("t", t)); });
    EXPECT_NEAR(fd, exact, 1e-5 * std::max(1.0, std::abs(exact))) << trial;
  }
}

TEST(Momenta, Examples) {
  auto p = momenta(lag(Y, "1/2*y_t^2"));
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(P(p.at({0, Y.zero(), 0})), "y_t");

  auto p2 = momenta(lag(Y, "1/2*y_tt^2"));
  EXPECT_EQ(P(p2.at({0, Y.unit(0), 0})), "y_tt");
  EXPECT_EQ(P(p2.at({0, Y.zero(), 0})), "-y_ttt");

  EXPECT_TRUE(momenta(lag(Y, "y^2 + sin(t)*y")).empty());
}

TEST(Momenta, SymmetricWeightingInTwoVariables) {
  auto p = momenta(lag(XT, "y_xt^2"));
  // dL/dy_xt = 2 y_xt is split evenly over the two ways of peeling one index.
  EXPECT_EQ(P(p.at({0, XT.unit(0), 1})), "y_xt");
  EXPECT_EQ(P(p.at({0, XT.unit(1), 0})), "y_xt");
}

TEST(FirstVariation, Examples) {
  auto osc = lag(Y, "1/2*y_t^2 - 1/2*y^2");
  auto v = adjoin_variation(Y);
  Lagrangian on_product{v.product, osc.density};
  auto fv = first_variation_identity(on_product, v.eta);
  EXPECT_TRUE(fv.residual.is_zero());
  EXPECT_EQ(P(fv.boundary.components[0]), "y_t*eta");

  auto g = jetvar::testing::sphere();
  auto vg = adjoin_variation(g.bundle);
  EXPECT_TRUE(first_variation_identity({vg.product, geodesic_energy(g).density}, vg.eta).residual.is_zero());

  auto v2 = adjoin_variation(Y);
  EXPECT_TRUE(first_variation_identity({v2.product, N(v2.product, "1/2*y_tt^2")}, v2.eta).residual.is_zero());
}

TEST(FirstVariation, RandomLagrangiansUpToOrderThree) {
  std::mt19937_64 rng(11);
  for (const JetBundle* b : {&Y, &XT, &Y2}) {
    auto v = adjoin_variation(*b);
    for (int order = 1; order <= 3; ++order) {
      if (b->n() == 2 && order == 3) continue;
      for (int k = 0; k < 3; ++k) {
        Lagrangian lambda{v.product, random_density(*b, order, rng)};
        EXPECT_NO_THROW(first_variation_identity(lambda, v.eta)) << P(lambda.density);
      }
    }
  }
}

TEST(FirstVariation, BoundVariation) {
  auto lambda = lag(Y, "1/2*y_t^2 - V(y)");
  ProjectableVectorField f{{N(Y, "t")}, {N(Y, "y^2")}};
  EXPECT_NO_THROW(first_variation_identity(lambda, bind_variation(Y, f)));
}

TEST(Symmetry, Examples) {
  auto osc = lag(Y, "1/2*y_t^2 - 1/2*y^2");
  auto r = is_symmetry(osc, {{Expr(1)}, {Expr(0)}});
  EXPECT_TRUE(r.symmetric);
  EXPECT_EQ(r.decided_by, SymmetryReport::Path::Symbolic);

  auto free = lag(Y, "1/2*y_t^2");
  auto s = is_symmetry(free, {{Expr(0)}, {N(Y, "y")}});
  EXPECT_FALSE(s.symmetric);
  EXPECT_TRUE(equivalent(s.lie_derivative, Expr(2) * free.density));

  auto g = jetvar::testing::sphere();
  auto rot = is_symmetry(geodesic_energy(g), {{Expr(0)}, {Expr(0), Expr(1)}});
  EXPECT_TRUE(rot.symmetric);
  EXPECT_EQ(rot.decided_by, SymmetryReport::Path::Symbolic);
}

TEST(Symmetry, NumericFallbackForTrigIdentities) {
  // The zero field written as sin^2 + cos^2 - 1 along d/dt.
  auto lambda = lag(Y, "1/2*y_t^2 + t*y");
  ProjectableVectorField rot{{N(Y, "sin(t)^2 + cos(t)^2 - 1")}, {Expr(0)}};
  auto r = is_symmetry(lambda, rot);
  EXPECT_TRUE(r.symmetric);
  EXPECT_EQ(r.decided_by, SymmetryReport::Path::Numeric);
  EXPECT_EQ(r.numeric.samples, 50);
}

TEST(Noether, EnergyOfPotentialMotion) {
  auto lambda = lag(Y, "1/2*y_t^2 - V(y)");
  ProjectableVectorField dt{{Expr(1)}, {Expr(0)}};
  auto eps = noether_current(lambda, dt);
  EXPECT_TRUE(equivalent(eps.components[0], N(Y, "-(1/2*y_t^2 + V(y))")));
  EXPECT_TRUE(noether_residual(lambda, dt, eps).is_zero());
}

TEST(Noether, AngularMomentumOnTheSphere) {
  auto g = jetvar::testing::sphere();
  auto lambda = geodesic_energy(g);
  ProjectableVectorField rot{{Expr(0)}, {Expr(0), Expr(1)}};
  auto eps = noether_current(lambda, rot);
  EXPECT_TRUE(equivalent(eps.components[0], N(g.bundle, "sin(th)^2*ph_t")));
  EXPECT_TRUE(noether_residual(lambda, rot, eps).is_zero());
}

TEST(Noether, ZeroFieldGivesZeroCurrent) {
  auto lambda = lag(Y, "1/2*y_t^2 - V(y)");
  EXPECT_TRUE(noether_current(lambda, ProjectableVectorField::zero(Y)).components[0].is_zero());
}

TEST(Noether, ResidualOffShellForNonSymmetry) {
  auto lambda = lag(Y, "1/2*y_t^2");
  ProjectableVectorField scale{{Expr(0)}, {N(Y, "y")}};
  auto eps = noether_current(lambda, scale);
  EXPECT_FALSE(noether_residual(lambda, scale, eps).is_zero());
}

TEST(Noether, DriftAlongIntegratedSolutions) {
  auto lambda = lag(Y, "1/2*y_t^2 - V(y)");
  auto eps = noether_current(lambda, {{Expr(1)}, {Expr(0)}});
  NumericProblem p;
  p.bundle = Y;
  p.equations = euler_lagrange(lambda).components;
  p.env = potential_env();
  p.initial = {0.3, 0.5};
  auto tr = integrate(p);
  EXPECT_LE(drift(p, tr, eps.components[0]), 1e-8);
}

TEST(Helmholtz, Examples) {
  SourceForm bad{{N(Y, "y_tt + y_t + y")}};
  auto r = helmholtz_check(Y, bad);
  EXPECT_FALSE(r.pass);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].beta, Y.unit(0));
  EXPECT_EQ(P(r.violations[0].value), "2");
  EXPECT_NE(r.describe(Y).find("H(y, y; t) = 2"), std::string::npos);

  EXPECT_TRUE(helmholtz_check(Y, SourceForm{{Expr(0)}}).pass);
  EXPECT_TRUE(helmholtz_check(Y, euler_lagrange(lag(Y, "1/2*y_t^2 - V(y)"))).pass);
}

TEST(Helmholtz, RandomEulerLagrangeExpressionsPass) {
  std::mt19937_64 rng(5);
  for (const JetBundle* b : {&Y, &XT, &Y2}) {
    for (int k = 0; k < 6; ++k) {
      JetBundle bk = b->with_order(1 + k % 2);
      Lagrangian lambda{bk, random_density(bk, bk.order(), rng)};
      auto r = helmholtz_check(bk, euler_lagrange(lambda));
      EXPECT_TRUE(r.pass) << P(lambda.density) << "\n" << r.describe(bk);
    }
  }
}

TEST(EulerLagrange, AnnihilatesHorizontallyExactTerms) {
  std::mt19937_64 rng(9);
  for (const JetBundle* b : {&Y, &XT, &Y2}) {
    for (int k = 0; k < 5; ++k) {
      Lagrangian lambda{*b, random_density(*b, 1, rng)};
      Current potential;
      for (int mu = 0; mu < b->n(); ++mu) potential.components.push_back(random_density(*b, 1, rng));
      Lagrangian shifted{*b, normalize(lambda.density + divergence(*b, potential))};
      auto a = euler_lagrange(lambda), c = euler_lagrange(shifted);
      for (std::size_t i = 0; i < a.components.size(); ++i) EXPECT_TRUE(equivalent(a.components[i], c.components[i]));
    }
  }
}

TEST(OnShell, ReducesHigherDerivatives) {
  auto lambda = lag(Y, "1/2*y_t^2 - 1/2*y^2");
  OnShell shell(Y, euler_lagrange(lambda).components);
  EXPECT_EQ(shell.order(), 2);
  EXPECT_EQ(P(shell.reduce(N(Y, "y_tt + y"))), "0");
  EXPECT_EQ(P(shell.reduce(N(Y, "y_tttt"))), "y");
  EXPECT_EQ(P(shell.reduce(N(Y, "y_ttt"))), "-y_t");
}
