#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jetvar/jet.hpp"
#include "jetvar/oracle.hpp"
#include "support.hpp"

using namespace jetvar;
using jetvar::testing::N;

namespace {

const JetBundle Y = JetBundle({"t"}, {"y"}, 1);
const JetBundle X = JetBundle({"x"}, {"y"}, 1);
const JetBundle XT = JetBundle({"x", "t"}, {"y", "z"}, 1);

std::string P(const Expr& e) { return to_plain(e); }

BigradedForm theta(int field, const MultiIndex& a) { return BigradedForm::basis(FormFactor::theta(field, a)); }
BigradedForm dx(int s) { return BigradedForm::basis(FormFactor::dx(s)); }
BigradedForm dy(int field, const MultiIndex& a) { return BigradedForm::basis(FormFactor::dy(field, a)); }

Expr random_expr(const JetBundle& b, std::mt19937_64& rng, int depth = 3) {
  std::uniform_int_distribution<int> pick(0, 99);
  std::vector<Expr> atoms;
  for (int s = 0; s < b.n(); ++s) atoms.push_back(b.base(s));
  for (int i = 0; i < b.m(); ++i)
    for (const auto& a : multi_indices(b.n(), 1)) atoms.push_back(b.coord(i, a));
  if (depth == 0) return atoms[pick(rng) % atoms.size()];
  Expr l = random_expr(b, rng, depth - 1), r = random_expr(b, rng, depth - 1);
  switch (pick(rng) % 5) {
    case 0: return l + r;
    case 1: return l * r;
    case 2: return sin(l) * r;
    case 3: return exp(l) + Expr(pick(rng) % 7 - 3) * r;
    default: return pow(l, 2) - r;
  }
}

BigradedForm random_form(const JetBundle& b, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 99);
  BigradedForm w;
  for (int k = 0; k < 3; ++k) {
    BigradedForm term = BigradedForm::scalar(random_expr(b, rng, 2));
    int factors = pick(rng) % 3;
    for (int f = 0; f < factors; ++f) {
      int field = pick(rng) % b.m();
      MultiIndex a = multi_indices(b.n(), 1)[pick(rng) % (b.n() + 1)];
      switch (pick(rng) % 3) {
        case 0: term = term.wedge(theta(field, a)); break;
        case 1: term = term.wedge(dy(field, a)); break;
        default: term = term.wedge(dx(pick(rng) % b.n())); break;
      }
    }
    w = w + term;
  }
  return w;
}

bool is_zero_form(const JetBundle& b, const BigradedForm& w) { return to_contact_basis(b, w).is_zero(); }

}  // namespace

TEST(MultiIndex, Basics) {
  MultiIndex a({2, 1}), b({0, 1});
  EXPECT_EQ(a.order(), 3);
  EXPECT_EQ(a.factorial(), 2);
  EXPECT_EQ(a + b, MultiIndex({2, 2}));
  EXPECT_EQ(a - b, MultiIndex({2, 0}));
  EXPECT_TRUE(b.divides(a));
  EXPECT_LT(b, a);
  EXPECT_EQ(binomial(MultiIndex({2, 1}), MultiIndex({1, 1})), 2);
  EXPECT_EQ(multi_indices(2, 2).size(), 6u);
}

TEST(JetBundle, ResolvesCoordinates) {
  EXPECT_EQ(P(*Y.resolve("y_tt")), "y_tt");
  EXPECT_EQ(P(*Y.resolve("y_{tt}")), "y_tt");
  EXPECT_EQ(P(*XT.resolve("y_xt")), P(*XT.resolve("y_tx")));
  EXPECT_FALSE(Y.resolve("z").has_value());
  EXPECT_THROW(Y.coord(0, MultiIndex({6})), Error);
  EXPECT_NO_THROW(Y.with_cap(8).coord(0, MultiIndex({8})));
  auto k = Y.decode(*Y.resolve("y_ttt"));
  ASSERT_TRUE(k.has_value());
  EXPECT_EQ(k->alpha.order(), 3);
}

TEST(TotalDerivative, Examples) {
  EXPECT_EQ(P(total_derivative(Y, N(Y, "y"), 0)), "y_t");
  EXPECT_EQ(P(total_derivative(Y, N(Y, "y_t^2"), 0)), "2*y_t*y_tt");
  EXPECT_EQ(P(total_derivative(X, N(X, "x*y"), 0)), "x*y_x + y");
  EXPECT_EQ(P(total_derivative(Y, N(Y, "y"), Y.zero())), "y");
  EXPECT_EQ(P(total_derivative(Y, N(Y, "y"), MultiIndex({2}))), "y_tt");
  EXPECT_EQ(P(total_derivative(XT, total_derivative(XT, N(XT, "y"), 0), 1)),
            P(total_derivative(XT, total_derivative(XT, N(XT, "y"), 1), 0)));
}

TEST(TotalDerivative, CommuteOnRandomExpressions) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    Expr e = random_expr(XT, rng);
    Expr a = total_derivative(XT, total_derivative(XT, e, 0), 1);
    Expr b = total_derivative(XT, total_derivative(XT, e, 1), 0);
    EXPECT_TRUE(equivalent(a, b)) << P(e);
  }
}

TEST(Forms, DifferentialExamples) {
  auto y = BigradedForm::scalar(N(Y, "y"));
  EXPECT_EQ(to_plain(Y, d_H(Y, y)), "y_t*dt");
  EXPECT_EQ(to_plain(Y, d_V(Y, y)), "theta(y)");
  EXPECT_TRUE(d_H(Y, BigradedForm::volume(Y) * N(Y, "1/2*y_t^2")).is_zero());
  EXPECT_EQ(to_plain(Y, d_H(Y, theta(0, Y.zero()))), "-theta(y_t)^dt");
}

TEST(Forms, Horizontalization) {
  EXPECT_EQ(to_plain(Y, horizontalize(Y, dy(0, Y.zero()))), "y_t*dt");
  EXPECT_TRUE(horizontalize(Y, theta(0, Y.unit(0))).is_zero());
  EXPECT_EQ(to_plain(Y, horizontalize(Y, dx(0))), "dt");
}

TEST(Forms, Contraction) {
  JetVectorField dt{{Expr(1)}, {}};
  EXPECT_EQ(to_plain(Y, contract(Y, dx(0), dt)), "1");
  JetVectorField eta{{Expr(0)}, {{{0, Y.zero()}, Expr::parameter("eta")}}};
  EXPECT_EQ(to_plain(Y, contract(Y, theta(0, Y.zero()).wedge(dx(0)), eta)), "eta*dt");
  JetVectorField dy_only{{Expr(0)}, {{{0, Y.zero()}, Expr(1)}}};
  EXPECT_TRUE(contract(Y, dx(0), dy_only).is_zero());
  EXPECT_THROW(contract(Y, BigradedForm::scalar(Expr(2)), dt), Error);
}

TEST(Forms, WedgeIsAntisymmetric) {
  auto a = theta(0, XT.zero()).wedge(dx(1)), b = dx(1).wedge(theta(0, XT.zero()));
  EXPECT_EQ(a, b * Expr(-1));
  EXPECT_TRUE(dx(0).wedge(dx(0)).is_zero());
  EXPECT_TRUE(theta(1, XT.unit(0)).wedge(theta(1, XT.unit(0))).is_zero());
}

TEST(Forms, SquareAndAnticommutationIdentities) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 20; ++k) {
    auto w = random_form(XT, rng);
    EXPECT_TRUE(is_zero_form(XT, d_H(XT, d_H(XT, w))));
    EXPECT_TRUE(is_zero_form(XT, d_V(XT, d_V(XT, w))));
    EXPECT_TRUE(is_zero_form(XT, d_H(XT, d_V(XT, w)) + d_V(XT, d_H(XT, w))));
  }
}

TEST(Forms, ExteriorDerivativeSplitsOnFunctions) {
  // d f in the dx/dy basis equals d_H f + d_V f.
  Expr f = N(Y, "sin(y)*y_t + t^2*y");
  BigradedForm d;
  d.add_term({FormFactor::dx(0)}, partial(f, Y.base(0)));
  for (const auto& k : jet_keys(Y, f)) d.add_term({FormFactor::dy(k.field, k.alpha)}, partial(f, Y.coord(k)));
  EXPECT_TRUE(is_zero_form(Y, d - d_H(Y, BigradedForm::scalar(f)) - d_V(Y, BigradedForm::scalar(f))));
}

TEST(Forms, ContactFormsVanishAlongSections) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> c(-4, 4);
  for (int k = 0; k < 10; ++k) {
    std::map<int, Expr> section;
    for (int i = 0; i < XT.m(); ++i)
      section[i] = normalize(Expr(c(rng)) * XT.base(0) * XT.base(1) + Expr(c(rng)) * pow(XT.base(1), 3) + Expr(c(rng)));
    auto w = theta(0, XT.zero()).wedge(dx(1)) * random_expr(XT, rng) + theta(1, XT.unit(0)) * random_expr(XT, rng);
    EXPECT_TRUE(pullback(XT, w, section).is_zero());
    EXPECT_TRUE(pullback(XT, dy(0, XT.zero()) - theta(0, XT.zero()), section) ==
                pullback(XT, dy(0, XT.zero()), section));
  }
}

TEST(Forms, HorizontalDifferentialPullsBackToCoordinateDerivative) {
  std::mt19937_64 rng(31);
  SamplingOptions o;
  for (int k = 0; k < 10; ++k) {
    Expr f = random_expr(Y, rng);
    std::map<int, Expr> section{{0, N(Y, "sin(t) + t^3/5")}};
    Expr dhf = pullback(Y, d_H(Y, BigradedForm::scalar(f)), section).coefficient({FormFactor::dx(0)});
    Expr pf = pullback(Y, f, section);
    auto report = fd_check(pf, Y.base(0), o);
    EXPECT_TRUE(report.zero) << report.failure;
    EXPECT_TRUE(random_zero_test(normalize(dhf - partial(pf, Y.base(0))), o).zero);
  }
}
