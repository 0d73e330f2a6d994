#include "support.hpp"

#include <random>

namespace jetvar::testing {

Expr parse(const JetBundle& bundle, const std::string& text) {
  ParseContext ctx;
  ctx.symbol = [&](const std::string& name) -> std::optional<Expr> {
    if (auto s = bundle.resolve(name)) return s;
    if (name == "pi") return Expr::pi();
    return Expr::parameter(name);
  };
  ctx.function_arity = [](const std::string& name) -> std::optional<int> {
    if (name == "V" || name == "W" || name == "f") return 1;
    if (name == "g" || name == "A" || name == "B" || name == "C") return 2;
    return std::nullopt;
  };
  return parse_expr(text, ctx);
}

Expr N(const JetBundle& bundle, const std::string& text) { return normalize(parse(bundle, text)); }

JetBundle mechanics(const std::string& field) { return JetBundle({"t"}, {field}, 1); }

Metric sphere() {
  JetBundle b({"t"}, {"th", "ph"}, 1);
  Matrix g{{Expr(1), Expr(0)}, {Expr(0), pow(sin(b.field(0)), 2)}};
  Metric m = make_metric({"th", "ph"}, g);
  m.bundle.mark_angle(0);
  return m;
}

Metric generic_metric() {
  JetBundle b({"t"}, {"q1", "q2"}, 1);
  Matrix g{{parse(b, "A(q1, q2)"), parse(b, "B(q1, q2)")}, {parse(b, "B(q1, q2)"), parse(b, "C(q1, q2)")}};
  return make_metric({"q1", "q2"}, g);
}

Metric random_polynomial_metric(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> c(1, 3);
  JetBundle b({"t"}, {"q1", "q2"}, 1);
  Expr x = b.field(0), y = b.field(1);
  Expr g11 = Expr(2) + Expr(Rational(c(rng), 4)) * x * x + Expr(Rational(c(rng), 5)) * y;
  Expr g12 = Expr(Rational(c(rng), 6)) * x * y;
  Expr g22 = Expr(2) + Expr(Rational(c(rng), 4)) * y * y + Expr(Rational(c(rng), 5)) * x * y;
  return make_metric({"q1", "q2"}, {{g11, g12}, {g12, g22}});
}

}  // namespace jetvar::testing
