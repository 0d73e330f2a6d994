#include <gtest/gtest.h>

#include <random>

#include "jetvar/lift.hpp"
#include "jetvar/oracle.hpp"
#include "support.hpp"

using namespace jetvar;
using jetvar::testing::N;

namespace {

const JetBundle Y = JetBundle({"t"}, {"y"}, 1);
const JetBundle XT = JetBundle({"x", "t"}, {"y", "z"}, 1);

std::string P(const Expr& e) { return to_plain(e); }

Expr poly(const std::vector<Expr>& vars, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(-2, 2), pick(0, 99);
  std::vector<Expr> terms{Expr(c(rng))};
  for (int k = 0; k < 3; ++k) {
    Expr t = Expr(c(rng));
    for (int f = 0; f < 1 + pick(rng) % 2; ++f) t = t * vars[pick(rng) % vars.size()];
    terms.push_back(t);
  }
  return normalize(Expr::add(terms));
}

ProjectableVectorField random_field(const JetBundle& b, std::mt19937_64& rng) {
  std::vector<Expr> base_vars, all_vars;
  for (int s = 0; s < b.n(); ++s) base_vars.push_back(b.base(s));
  all_vars = base_vars;
  for (int i = 0; i < b.m(); ++i) all_vars.push_back(b.field(i));
  ProjectableVectorField f;
  for (int s = 0; s < b.n(); ++s) f.base.push_back(poly(base_vars, rng));
  for (int i = 0; i < b.m(); ++i) f.fiber.push_back(poly(all_vars, rng));
  return f;
}

std::map<int, Expr> random_section(const JetBundle& b, std::mt19937_64& rng) {
  std::vector<Expr> base_vars;
  for (int s = 0; s < b.n(); ++s) base_vars.push_back(b.base(s));
  std::map<int, Expr> out;
  for (int i = 0; i < b.m(); ++i) out[i] = poly(base_vars, rng);
  return out;
}

}  // namespace

TEST(Prolong, Examples) {
  auto dt = prolong(Y, {{Expr(1)}, {Expr(0)}}, 2);
  EXPECT_EQ(P(dt.base[0]), "1");
  for (const auto& [k, v] : dt.fiber) EXPECT_TRUE(v.is_zero());

  auto scale = prolong(Y, {{Expr(0)}, {N(Y, "y")}}, 1);
  EXPECT_EQ(P(scale.fiber.at({0, Y.zero()})), "y");
  EXPECT_EQ(P(scale.fiber.at({0, Y.unit(0)})), "y_t");

  ProjectableVectorField general{{jetvar::testing::parse(Y, "f(t)")}, {jetvar::testing::parse(Y, "g(t, y)")}};
  auto hv = split_HV(Y, general, 1);
  Expr q = N(Y, "g(t, y) - y_t*f(t)");
  EXPECT_TRUE(equivalent(hv.vertical_at({0, Y.unit(0)}), total_derivative(Y, q, 0)));
  auto full = prolong(Y, general, 1);
  EXPECT_TRUE(equivalent(full.fiber.at({0, Y.unit(0)}), total_derivative(Y, q, 0) + N(Y, "y_tt*f(t)")));
  // The prolonged components involve no jets beyond their own order.
  EXPECT_EQ(jet_order(Y, full.fiber.at({0, Y.unit(0)})), 1);
}

TEST(SplitHV, Examples) {
  auto a = split_HV(Y, {{Expr(1)}, {Expr(0)}}, 1);
  EXPECT_EQ(P(a.horizontal[0]), "1");
  EXPECT_EQ(P(a.vertical_at({0, Y.zero()})), "-y_t");

  auto b = split_HV(Y, {{Expr(0)}, {N(Y, "t*y^2")}}, 1);
  EXPECT_TRUE(b.horizontal[0].is_zero());
  EXPECT_EQ(P(b.vertical_at({0, Y.unit(0)})), P(total_derivative(Y, N(Y, "t*y^2"), 0)));

  auto c = split_HV(Y, {{Expr(1)}, {N(Y, "y")}}, 0);
  EXPECT_EQ(P(c.vertical_at({0, Y.zero()})), "-(y_t - y)");
}

TEST(LieDerivative, Examples) {
  std::map<int, Expr> gamma{{0, N(Y, "sin(t)")}};
  EXPECT_EQ(P(lie_derivative(Y, {{Expr(0)}, {N(Y, "y^2")}}, gamma)[0]), "-sin(t)^2");
  auto l = lie_derivative(Y, {{N(Y, "t")}, {N(Y, "y")}}, gamma);
  EXPECT_EQ(P(l[0]), "t*cos(t) - sin(t)");
}

TEST(LieDerivative, FundamentalRelation) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    auto f = random_field(XT, rng);
    auto q = vertical_part(XT, f);
    auto l = lie_components(XT, f);
    for (int i = 0; i < XT.m(); ++i) EXPECT_TRUE(normalize(q[i] + l[i]).is_zero());
  }
}

TEST(LieDerivative, MetricComponentsUnderTheCovariantRule) {
  // g_ij(x) on a 2D base: the rule gives the classical Lie derivative.
  JetBundle b({"x1", "x2"}, {"g11", "g12", "g22"}, 1);
  auto rule = covariant2_rule(b);
  std::vector<Expr> xi{N(b, "x1*x2"), N(b, "x1^2 - x2")};
  auto field = apply_lift(b, rule, xi);
  std::map<int, Expr> section{{0, N(b, "1 + x2^2")}, {1, N(b, "x1")}, {2, N(b, "2 + x1*x2")}};
  auto l = lie_derivative(b, field, section);
  Matrix g{{section[0], section[1]}, {section[1], section[2]}};
  int index[2][2] = {{0, 1}, {1, 2}};
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      std::vector<Expr> terms;
      for (int k = 0; k < 2; ++k) {
        terms.push_back(xi[k] * partial(g[i][j], b.base(k)));
        terms.push_back(g[k][j] * partial(xi[k], b.base(i)));
        terms.push_back(g[i][k] * partial(xi[k], b.base(j)));
      }
      EXPECT_TRUE(equivalent(l[index[i][j]], Expr::add(terms)));
    }
}

TEST(ApplyLift, IdentityAndTangentRules) {
  JetBundle b({"x"}, {"u"}, 1);
  LiftRule identity{"identity", {"xi"}, {Expr(0)}, 0, 0};
  auto f = apply_lift(b, identity, {N(b, "x^2")});
  EXPECT_EQ(P(f.base[0]), "x^2");
  EXPECT_TRUE(f.fiber[0].is_zero());

  auto tangent = apply_lift(b, tangent_rule(b), {N(b, "sin(x)")});
  EXPECT_EQ(P(tangent.fiber[0]), "u*cos(x)");

  // The tangent lift is the first prolongation of the flow on curves x(tau).
  JetBundle curves({"tau"}, {"x"}, 1);
  auto p = prolong(curves, {{Expr(0)}, {N(curves, "sin(x)")}}, 1);
  EXPECT_EQ(P(substitute(tangent.fiber[0], {{"u", N(curves, "x_tau")}})), P(p.fiber.at({0, curves.unit(0)})));
}

TEST(ApplyLift, RotationIsKillingForTheRoundMetric) {
  JetBundle b({"th", "ph"}, {"g11", "g12", "g22"}, 1);
  auto rule = covariant2_rule(b);
  std::map<int, Expr> round{{0, Expr(1)}, {1, Expr(0)}, {2, N(b, "sin(th)^2")}};
  auto rot = apply_lift(b, rule, {Expr(0), Expr(1)});
  for (const auto& c : lie_derivative(b, rot, round)) EXPECT_TRUE(c.is_zero());

  auto tilted = apply_lift(b, rule, {N(b, "sin(ph)"), N(b, "cos(th)/sin(th)*cos(ph)")});
  SamplingOptions o;
  o.angles = {"th"};
  for (const auto& c : lie_derivative(b, tilted, round)) EXPECT_TRUE(random_zero_test(c, o).zero) << P(c);
}

TEST(ApplyLift, OrderMismatch) {
  JetBundle b({"x"}, {"u"}, 1);
  LiftRule r = tangent_rule(b);
  r.k = 0;
  EXPECT_THROW(apply_lift(b, r, {N(b, "x")}), Error);
  EXPECT_THROW(apply_lift(b, tangent_rule(b), {N(b, "x"), N(b, "x")}), Error);
}

TEST(ProjectableVectorField, Validation) {
  EXPECT_THROW((ProjectableVectorField{{N(Y, "y")}, {Expr(0)}}.validate(Y)), Error);
  EXPECT_THROW((ProjectableVectorField{{Expr(1)}, {N(Y, "y_t")}}.validate(Y)), Error);
  EXPECT_NO_THROW((ProjectableVectorField{{N(Y, "t")}, {N(Y, "y*t")}}.validate(Y)));
}

TEST(Prolong, RespectsBrackets) {
  std::mt19937_64 rng(41);
  for (const JetBundle* b : {&Y, &XT}) {
    for (int k = 0; k < 4; ++k) {
      auto a = random_field(*b, rng), c = random_field(*b, rng);
      int s = 2;
      auto lhs = prolong(*b, bracket(*b, a, c), s);
      auto rhs = bracket(*b, prolong(*b, a, s), prolong(*b, c, s));
      for (int sg = 0; sg < b->n(); ++sg) EXPECT_TRUE(equivalent(lhs.base[sg], rhs.base[sg]));
      for (const auto& [key, v] : lhs.fiber) EXPECT_TRUE(equivalent(v, rhs.fiber.at(key)));
    }
  }
}

TEST(LieDerivative, LinearInTheFieldAndQuasilinearInTheSection) {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 5; ++k) {
    auto a = random_field(XT, rng), c = random_field(XT, rng);
    ProjectableVectorField sum_field;
    for (int s = 0; s < XT.n(); ++s) sum_field.base.push_back(a.base[s] + Expr(3) * c.base[s]);
    for (int i = 0; i < XT.m(); ++i) sum_field.fiber.push_back(a.fiber[i] + Expr(3) * c.fiber[i]);
    auto la = lie_components(XT, a), lc = lie_components(XT, c), ls = lie_components(XT, sum_field);
    for (int i = 0; i < XT.m(); ++i) {
      EXPECT_TRUE(equivalent(ls[i], la[i] + Expr(3) * lc[i]));
      // Affine in the first derivatives: second derivatives in them vanish.
      for (const auto& key : jet_keys(XT, ls[i])) {
        if (key.alpha.order() != 1) continue;
        EXPECT_EQ(jet_order(XT, partial(ls[i], XT.coord(key))), 0);
        for (const auto& other : jet_keys(XT, ls[i]))
          if (other.alpha.order() == 1) EXPECT_TRUE(partial(partial(ls[i], XT.coord(key)), XT.coord(other)).is_zero());
      }
    }
  }
}

TEST(LieDerivative, CommutesWithProlongation) {
  std::mt19937_64 rng(47);
  for (int k = 0; k < 5; ++k) {
    auto f = random_field(XT, rng);
    auto gamma = random_section(XT, rng);
    auto lie = lie_derivative(XT, f, gamma);
    auto hv = split_HV(XT, f, 2);
    for (int i = 0; i < XT.m(); ++i)
      for (const auto& alpha : multi_indices(XT.n(), 2)) {
        Expr prolonged = pullback(XT, -hv.vertical_at({i, alpha}), gamma);
        Expr differentiated = lie[i];
        for (int s = 0; s < XT.n(); ++s)
          for (int r = 0; r < alpha[s]; ++r) differentiated = partial(differentiated, XT.base(s));
        EXPECT_TRUE(equivalent(prolonged, differentiated));
      }
  }
}

TEST(VariationField, BoundComponentsAreTotalDerivatives) {
  ProjectableVectorField f{{N(Y, "t^2")}, {N(Y, "y^3")}};
  auto eta = bind_variation(Y, f);
  auto u = as_vertical_field(Y, eta, 3);
  for (const auto& alpha : multi_indices(1, 3))
    EXPECT_TRUE(equivalent(u.vertical_at({0, alpha}), total_derivative(Y, eta.components[0], alpha)));
  EXPECT_TRUE(equivalent(prolonged_component(Y, eta, 0, MultiIndex({2})), u.vertical_at({0, MultiIndex({2})})));

  auto adjoined = adjoin_variation(Y);
  EXPECT_EQ(adjoined.product.field_name(1), "eta");
  EXPECT_EQ(P(adjoined.eta.components[0]), "eta");

  JetBundle q({"t"}, {"q1", "q2"}, 1);
  auto tv = tangent_variation(q, N(q, "t"), {N(q, "q2"), N(q, "-q1")});
  EXPECT_EQ(P(tv.components[0]), "-(t*q1_t - q2)");
}
