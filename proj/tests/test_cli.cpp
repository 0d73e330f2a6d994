#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "jetvar/cli.hpp"

using namespace jetvar;
using namespace jetvar::cli;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(JETVAR_PROBLEMS_DIR) + "/" + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Problem load(const std::string& name) {
  auto r = parse_problem(slurp(name));
  if (r.error) ADD_FAILURE() << r.error->render(name);
  return *r.problem;
}

Diagnostic diagnose(const std::string& text) {
  auto r = parse_problem(text);
  EXPECT_TRUE(r.error.has_value()) << text;
  return r.error.value_or(Diagnostic{});
}

Outcome run_on(const std::string& file, const std::string& cmd, Options o = {}) { return run(cmd, load(file), o); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const char* kOscillator = "base t\nfields y\nlagrangian = 1/2*y_t^2 - 1/2*y^2\n";

}  // namespace

TEST(ParseProblem, MinimalOscillator) {
  auto r = parse_problem(kOscillator);
  ASSERT_FALSE(r.error) << r.error->message;
  const auto& p = *r.problem;
  EXPECT_EQ(p.bundle.n(), 1);
  EXPECT_EQ(p.bundle.m(), 1);
  EXPECT_EQ(p.lagrangian->bundle.order(), 1);
  EXPECT_EQ(to_plain(p.lagrangian->density), "1/2*y_t^2 - 1/2*y^2");
}

TEST(ParseProblem, SphereMetric) {
  auto p = load("sphere.jv");
  ASSERT_TRUE(p.metric.has_value());
  EXPECT_EQ(p.metric->dim(), 2);
  EXPECT_EQ(to_plain(p.metric->g[1][1]), "sin(th)^2");
  EXPECT_TRUE(p.bundle.is_angle(0));
  EXPECT_EQ(p.variation, (std::vector<std::string>{"eta", "psi"}));
  EXPECT_EQ(p.bindings.size(), 4u);
}

TEST(ParseProblem, UndeclaredFieldIsLocated) {
  auto d = diagnose("base t\nfields y\nlagrangian = 1/2*y_t^2 + z*y\n");
  EXPECT_NE(d.message.find("'z'"), std::string::npos);
  EXPECT_EQ(d.line, 3);
  EXPECT_EQ(d.column, 26);
  EXPECT_EQ(d.render("f.jv"), "f.jv:3:26: error: unknown identifier 'z'");
}

TEST(ParseProblem, ArityMismatchAndGrammarErrors) {
  auto arity = diagnose("base t\nfields y\nfunction V 1\nlagrangian = V(y, y_t)\n");
  EXPECT_NE(arity.message.find("arity mismatch"), std::string::npos);
  EXPECT_EQ(arity.line, 4);
  EXPECT_EQ(arity.column, 14);

  auto grammar = diagnose("base t\nfields y\nlagrangian = y_t^2 +* y\n");
  EXPECT_NE(grammar.message.find("grammar error"), std::string::npos);
  EXPECT_EQ(grammar.line, 3);
  EXPECT_EQ(grammar.column, 21);

  auto directive = diagnose("base t\nfields y\nlagrange = y\n");
  EXPECT_NE(directive.message.find("unknown directive"), std::string::npos);
  EXPECT_EQ(directive.line, 3);

  EXPECT_NE(diagnose("fields y\nlagrangian = y\n").message.find("base"), std::string::npos);
  EXPECT_NE(diagnose("base t\nfields y\nlagrangian = y\nlagrangian = y\n").message.find("one Lagrangian"), std::string::npos);
  EXPECT_NE(diagnose("base t\nfields y\nlagrangian order 1 = y_tt^2\n").message.find("order 2"), std::string::npos);
  EXPECT_NE(diagnose("base t\nfields y\nvector v = [y; 0]\n").message.find("projectable"), std::string::npos);
  EXPECT_NE(diagnose("base t\nfields y\nbind b: z = t\n").message.find("'z'"), std::string::npos);
  EXPECT_NE(diagnose("base t\nfields a b\nmetric g = [[1,0]]\n").message.find("2x2"), std::string::npos);
  EXPECT_NE(diagnose("base t\nfields y\nlagrangian = y_tttttttttt\n").message.find("cap"), std::string::npos);
}

TEST(ParseProblem, TotalOnMalformedInput) {
  // Random edits of the shipped files must give a model or a diagnostic.
  std::mt19937_64 rng(5);
  const std::string alphabet = "[](),;:=+-*/^ _#\nxyzt0123456789ab\x01";
  for (const auto* name : {"oscillator.jv", "sphere.jv", "free-particle.jv", "flat-tq.jv"}) {
    std::string base = slurp(name);
    for (int k = 0; k < 150; ++k) {
      std::string s = base;
      int edits = 1 + static_cast<int>(rng() % 4);
      for (int e = 0; e < edits; ++e) {
        std::size_t at = rng() % (s.size() + 1);
        switch (rng() % 3) {
          case 0: s.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
          case 1: if (at < s.size()) s.erase(at, 1); break;
          default: if (at < s.size()) s[at] = alphabet[rng() % alphabet.size()]; break;
        }
      }
      ParseResult r;
      EXPECT_NO_THROW(r = parse_problem(s));
      EXPECT_NE(r.problem.has_value(), r.error.has_value());
      if (r.error) {
        EXPECT_GE(r.error->line, 1);
        EXPECT_GE(r.error->column, 1);
      }
    }
  }
}

TEST(Run, Examples) {
  EXPECT_EQ(run_on("oscillator.jv", "el").out, "-(y_tt + y)\n");

  Options bind;
  bind.bind = "great-circle";
  auto j = run_on("sphere.jv", "jacobi", bind);
  EXPECT_EQ(j.code, 0);
  EXPECT_EQ(lines(j.out).at(0), "eta_tt + eta = 0");
  EXPECT_EQ(lines(j.out).at(1), "psi_tt = 0");
  auto unbound = run_on("sphere.jv", "jacobi");
  EXPECT_EQ(lines(unbound.out).size(), 2u);

  auto cl = lines(run_on("flat-tq.jv", "complete-lift").out);
  ASSERT_EQ(cl.size(), 4u);
  EXPECT_EQ(cl[0], "[0, 0, 1, 0]");
  EXPECT_EQ(cl[1], "[0, 0, 0, 1]");

  EXPECT_EQ(run_on("oscillator.jv", "el", {.format = Format::Latex}).out, "-\\left(\\ddot{y} + y\\right)\n");
  EXPECT_EQ(run_on("oscillator.jv", "momenta").out, "p[y, t] = y_t\n");
  EXPECT_EQ(run_on("oscillator.jv", "second-variation").out, "-(eta*eta_tt + eta^2)\n");
  EXPECT_EQ(run_on("oscillator.jv", "noether", {.field = "time"}).out, "-(1/2*y_t^2 + 1/2*y^2)\n");
}

TEST(Run, ExitCodes) {
  for (const auto* name : {"oscillator.jv", "free-particle.jv", "sphere.jv", "flat-tq.jv"}) {
    auto v = run_on(name, "verify");
    EXPECT_EQ(v.code, 0) << name << "\n" << v.out << v.err;
  }
  auto bad = parse_problem("base t\nfields y\nsource = [y_tt + y_t + y]\n");
  ASSERT_TRUE(bad.problem);
  auto h = run("helmholtz", *bad.problem, {});
  EXPECT_EQ(h.code, 1);
  EXPECT_NE(h.out.find("violated: H(y, y; t) = 2"), std::string::npos) << h.out;

  EXPECT_EQ(run_on("oscillator.jv", "symmetry", {.field = "scaling"}).code, 1);
  EXPECT_EQ(run_on("oscillator.jv", "symmetry", {.field = "time"}).code, 0);
  EXPECT_EQ(run_on("oscillator.jv", "jacobi", {.bind = "nowhere"}).code, 2);
  EXPECT_EQ(run_on("oscillator.jv", "complete-lift").code, 2);
  EXPECT_EQ(run_on("oscillator.jv", "no-such-command").code, 2);
  EXPECT_EQ(run("noether", load("free-particle.jv"), {}).code, 2);  // ambiguous field
}

TEST(Run, VerifyReportsFailures) {
  // Not a geodesic: verify names the failing binding and exits 1.
  std::string text = slurp("sphere.jv") + "bind off: th = 1, ph = t\n";
  auto r = parse_problem(text);
  ASSERT_TRUE(r.problem);
  auto v = run("verify", *r.problem, {});
  EXPECT_EQ(v.code, 1);
  EXPECT_NE(v.out.find("FAIL critical section off"), std::string::npos);
}

TEST(Run, Deterministic) {
  for (const auto* cmd : {"el", "deform", "jacobi", "bianchi", "strong-current", "verify"}) {
    auto a = run_on("sphere.jv", cmd), b = run_on("sphere.jv", cmd);
    EXPECT_EQ(a.out, b.out) << cmd;
  }
}

TEST(Run, TreeOutputRoundTrips) {
  struct Case {
    const char* file;
    const char* cmd;
  };
  for (auto [file, cmd] : {Case{"oscillator.jv", "el"}, Case{"sphere.jv", "el"}, Case{"sphere.jv", "jacobi"},
                           Case{"sphere.jv", "deform"}, Case{"sphere.jv", "strong-current"},
                           Case{"sphere.jv", "bianchi"}, Case{"free-particle.jv", "momenta"}}) {
    Problem p = load(file);
    auto plain = lines(run(cmd, p, {}).out);
    auto tree = lines(run(cmd, p, {.format = Format::Tree}).out);
    ASSERT_EQ(plain.size(), tree.size());
    auto ctx = p.context(p.adjoined().product);
    for (std::size_t i = 0; i < tree.size(); ++i) {
      auto cut = tree[i].rfind(" = (");
      std::string label = cut == std::string::npos ? "" : tree[i].substr(0, cut + 3);
      std::string body = cut == std::string::npos ? tree[i] : tree[i].substr(cut + 3);
      Expr back = normalize(parse_tree(body, ctx));
      EXPECT_EQ(label + to_plain(back), plain[i]) << file << " " << cmd;
      EXPECT_EQ(to_tree(back), body);
    }
  }
}

TEST(Run, Integrate) {
  auto r = run_on("oscillator.jv", "integrate");
  ASSERT_EQ(r.code, 0) << r.err;
  auto ls = lines(r.out);
  EXPECT_EQ(ls.front(), "t y y_t");
  EXPECT_EQ(ls.at(11).rfind("10 -0.5440211108", 0), 0u) << ls.at(11);
  EXPECT_NE(r.out.find("drift energy = "), std::string::npos);
  EXPECT_EQ(run("integrate", *parse_problem(kOscillator).problem, {}).code, 2);
}
