#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "jetvar/cli.hpp"

namespace jetvar::cli {

namespace {

struct InputError {
  std::string message;
};

[[noreturn]] void input_error(const std::string& message) { throw InputError{message}; }

struct Item {
  std::string label;
  Expr value;
};

class Context {
 public:
  Context(const Problem& p, const Options& o) : p_(p), o_(o) {}

  const Problem& problem() const { return p_; }
  const Options& options() const { return o_; }

  const Lagrangian& lagrangian() const {
    if (!p_.lagrangian) input_error("the problem declares no Lagrangian or metric");
    return *p_.lagrangian;
  }
  const Metric& metric() const {
    if (!p_.metric) input_error("the problem declares no metric");
    return *p_.metric;
  }
  const AdjoinedVariation& adjoined() const {
    if (!adjoined_) adjoined_ = p_.adjoined();
    return *adjoined_;
  }

  const NamedField& field() const {
    if (o_.field) {
      if (const auto* f = p_.find_field(*o_.field)) return *f;
      input_error("unknown vector field '" + *o_.field + "'");
    }
    if (p_.fields.size() == 1) return p_.fields.front();
    if (p_.fields.empty()) input_error("the problem declares no vector field");
    input_error("several vector fields are declared; choose one with --field");
  }

  std::optional<std::map<int, Expr>> binding(const JetBundle& b) const {
    if (!o_.bind) return std::nullopt;
    const Binding* bd = p_.find_binding(*o_.bind);
    if (!bd) input_error("unknown binding '" + *o_.bind + "'");
    return section(b, *bd);
  }

  static std::map<int, Expr> section(const JetBundle& b, const Binding& bd) {
    std::map<int, Expr> out;
    for (const auto& [name, v] : bd.values) {
      auto i = b.field_index(name);
      if (!i) input_error("binding '" + bd.name + "' names '" + name + "', which this command does not use");
      out[*i] = v;
    }
    return out;
  }

  SamplingOptions sampling(const JetBundle& b) const {
    SamplingOptions s;
    s.seed = o_.seed;
    s.tol = o_.tol;
    for (const auto& [k, v] : p_.values) s.env.values[k] = v;
    return sampling_for(b, s);
  }

  std::string show(const Expr& e) const { return render(e, o_.format); }

  void emit(std::ostream& os, const std::vector<Item>& items, bool bare_if_single = true) const {
    if (bare_if_single && items.size() == 1) {
      os << show(items[0].value) << "\n";
      return;
    }
    for (const auto& it : items) os << it.label << " = " << show(it.value) << "\n";
  }

 private:
  const Problem& p_;
  const Options& o_;
  mutable std::optional<AdjoinedVariation> adjoined_;
};

Expr sign_normalized(const Expr& e) {
  Expr n = normalize(e);
  if (to_plain(n).starts_with("-")) n = normalize(-n);
  return n;
}

std::vector<Item> pulled(const Context& c, const JetBundle& b, std::vector<Item> items) {
  if (auto sec = c.binding(b))
    for (auto& it : items) it.value = normalize(pullback(b, it.value, *sec));
  return items;
}

std::vector<Item> current_items(const JetBundle& b, const Current& cur, const std::string& stem) {
  std::vector<Item> out;
  for (int mu = 0; mu < b.n(); ++mu) out.push_back({stem + "_" + b.base_name(mu), cur.components[mu]});
  return out;
}

int cmd_el(const Context& c, std::ostream& os) {
  const auto& l = c.lagrangian();
  auto el = euler_lagrange(l);
  std::vector<Item> items;
  for (int i = 0; i < l.bundle.m(); ++i) items.push_back({"E_" + l.bundle.field_name(i), el.components[i]});
  c.emit(os, pulled(c, l.bundle, items));
  return 0;
}

int cmd_momenta(const Context& c, std::ostream& os) {
  const auto& l = c.lagrangian();
  std::vector<Item> items;
  for (const auto& [k, v] : momenta(l))
    items.push_back({"p[" + l.bundle.coord_name(k.field, k.beta) + ", " + l.bundle.base_name(k.mu) + "]", v});
  c.emit(os, items, false);
  return 0;
}

int cmd_noether(const Context& c, std::ostream& os, std::ostream& err) {
  const auto& l = c.lagrangian();
  const auto& f = c.field();
  auto report = is_symmetry(l, f.field, c.sampling(l.bundle));
  if (!report.symmetric) err << "note: '" << f.name << "' is not a symmetry; the current is not conserved\n";
  c.emit(os, current_items(l.bundle, noether_current(l, f.field), "eps"));
  return 0;
}

int cmd_symmetry(const Context& c, std::ostream& os) {
  const auto& l = c.lagrangian();
  const auto& f = c.field();
  auto r = is_symmetry(l, f.field, c.sampling(l.bundle));
  if (r.symmetric) {
    if (r.decided_by == SymmetryReport::Path::Symbolic)
      os << "symmetric (symbolic)\n";
    else
      os << "symmetric (numeric, " << r.numeric.samples << " samples, max residual " << r.numeric.max_residual << ")\n";
    return 0;
  }
  os << "not a symmetry: lie derivative = " << c.show(r.lie_derivative) << "\n";
  return 1;
}

int cmd_helmholtz(const Context& c, std::ostream& os) {
  const auto& p = c.problem();
  SourceForm delta;
  int order = 1;
  if (p.source) {
    delta = *p.source;
    for (const auto& e : delta.components) order = std::max(order, jet_order(p.bundle, e));
  } else {
    delta = euler_lagrange(c.lagrangian());
    order = 2 * c.lagrangian().bundle.order();
  }
  JetBundle b = p.bundle.with_order(order);
  auto r = helmholtz_check(b, delta);
  if (r.pass) {
    os << "pass\n";
    return 0;
  }
  std::string d = r.describe(b);
  os << d;
  if (d.empty() || d.back() != '\n') os << "\n";
  return 1;
}

int cmd_deform(const Context& c, std::ostream& os) {
  const auto& l = c.lagrangian();
  if (c.options().field) {
    const auto& f = c.field();
    auto d = deform(l, l.bundle, bind_variation(l.bundle, f.field));
    std::vector<Item> items{{"omega", d.raw}, {"integrated", d.integrated}};
    for (auto& it : current_items(l.bundle, d.discarded, "discarded")) items.push_back(it);
    c.emit(os, pulled(c, l.bundle, items), false);
    return 0;
  }
  const auto& v = c.adjoined();
  auto d = deform(l, v);
  std::vector<Item> items{{"omega", d.raw}, {"integrated", d.integrated}};
  for (auto& it : current_items(v.product, d.discarded, "discarded")) items.push_back(it);
  c.emit(os, pulled(c, v.product, items), false);
  return 0;
}

std::vector<Item> eta_items(const AdjoinedVariation& v, int m, const std::vector<Expr>& comps, const std::string& stem) {
  std::vector<Item> items;
  for (int i = 0; i < m; ++i) items.push_back({stem + "_" + v.product.field_name(m + i), comps[i]});
  return items;
}

// Binding of the original fields: equations "lhs = 0"; binding of every
// field: a kernel verdict.
int bound_system(const Context& c, const AdjoinedVariation& v, const std::vector<Item>& items, std::ostream& os) {
  const Binding* bd = c.problem().find_binding(*c.options().bind);
  if (!bd) input_error("unknown binding '" + *c.options().bind + "'");
  auto sec = Context::section(v.product, *bd);
  int m = c.lagrangian().bundle.m();
  if (static_cast<int>(sec.size()) == v.product.m()) {
    std::vector<Expr> comps;
    for (const auto& it : items) comps.push_back(it.value);
    auto r = vanishes_along(v.product, comps, sec, c.sampling(v.product));
    if (r.in_kernel) {
      os << "in kernel (" << (r.symbolic ? "symbolic" : "numeric") << ")\n";
      return 0;
    }
    os << "not in kernel: max residual " << r.numeric.max_residual << "\n";
    for (std::size_t i = 0; i < items.size(); ++i) os << items[i].label << " = " << c.show(r.pulled_back[i]) << "\n";
    return 1;
  }
  for (int i = 0; i < m; ++i)
    if (!sec.count(i)) input_error("binding '" + bd->name + "' must give every field of the problem");
  for (const auto& it : items) os << c.show(sign_normalized(pullback(v.product, it.value, sec))) << " = 0\n";
  return 0;
}

int cmd_jacobi(const Context& c, std::ostream& os) {
  const auto& l = c.lagrangian();
  const auto& v = c.adjoined();
  auto sys = jacobi(l, v);
  auto items = eta_items(v, l.bundle.m(), sys.components, "J");
  if (c.options().bind) return bound_system(c, v, items, os);
  c.emit(os, items);
  return 0;
}

int cmd_bianchi(const Context& c, std::ostream& os) {
  const auto& l = c.lagrangian();
  const auto& v = c.adjoined();
  auto b = bianchi(l, v);
  auto items = eta_items(v, l.bundle.m(), b.beta, "beta");
  if (c.options().bind) return bound_system(c, v, items, os);
  for (auto& it : current_items(v.product, b.remainder, "remainder")) items.push_back(it);
  c.emit(os, items, false);
  return 0;
}

int cmd_second_variation(const Context& c, std::ostream& os) {
  const auto& l = c.lagrangian();
  if (c.options().field) {
    c.emit(os, pulled(c, l.bundle, {{"d2L", variational_derivative(l, c.field().field, 2)}}));
    return 0;
  }
  const auto& v = c.adjoined();
  c.emit(os, pulled(c, v.product, {{"d2L", second_variation(l, v)}}));
  return 0;
}

int cmd_strong_current(const Context& c, std::ostream& os) {
  const auto& l = c.lagrangian();
  const auto& v = c.adjoined();
  c.emit(os, pulled(c, v.product, current_items(v.product, strong_current(l, v), "H")));
  return 0;
}

int cmd_complete_lift(const Context& c, std::ostream& os) {
  auto cl = complete_lift(c.metric(), c.problem().variation);
  auto f = c.options().format;
  if (f == Format::Latex) os << "\\begin{pmatrix}\n";
  for (std::size_t i = 0; i < cl.g.size(); ++i) {
    std::string row;
    for (std::size_t j = 0; j < cl.g[i].size(); ++j) {
      if (j) row += f == Format::Latex ? " & " : f == Format::Tree ? " " : ", ";
      row += c.show(cl.g[i][j]);
    }
    if (f == Format::Latex)
      os << row << (i + 1 < cl.g.size() ? " \\\\" : "") << "\n";
    else if (f == Format::Tree)
      os << "(row " << row << ")\n";
    else
      os << "[" << row << "]\n";
  }
  if (f == Format::Latex) os << "\\end{pmatrix}\n";
  return 0;
}

NumericProblem numeric_problem(const Context& c) {
  const auto& p = c.problem();
  if (p.bundle.n() != 1) input_error("integration needs a single base coordinate");
  NumericProblem np;
  np.bundle = p.bundle.with_order(2 * p.bundle.order());
  np.equations = p.source ? p.source->components : euler_lagrange(c.lagrangian()).components;
  for (const auto& name : p.parameters)
    if (!p.values.count(name)) input_error("parameter '" + name + "' has no value");
  if (!p.functions.empty()) input_error("opaque functions cannot be integrated; replace them by expressions");
  for (const auto& [k, v] : p.values) np.env.values[k] = v;
  int r = 0;
  for (const auto& e : np.equations) r = std::max(r, jet_order(np.bundle, e));
  for (int i = 0; i < np.bundle.m(); ++i)
    for (int k = 0; k < r; ++k) {
      std::string name = np.bundle.coord_name(i, MultiIndex({k}));
      auto it = p.initial.find(name);
      if (it == p.initial.end()) input_error("missing initial value for " + name);
      np.initial.push_back(it->second);
    }
  Span s = p.span.value_or(Span{});
  np.t0 = s.t0;
  np.t1 = s.t1;
  np.h = s.h;
  return np;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int cmd_integrate(const Context& c, std::ostream& os) {
  auto np = numeric_problem(c);
  auto tr = integrate(np);
  os << np.bundle.base_name(0);
  for (const auto& n : tr.state_names) os << " " << n;
  os << "\n";
  std::size_t last = tr.t.size() - 1, stride = std::max<std::size_t>(1, last / 10);
  for (std::size_t k = 0; k <= last; k += stride) {
    os << fmt(tr.t[k]);
    for (double x : tr.states[k]) os << " " << fmt(x);
    os << "\n";
    if (k != last && k + stride > last) k = last - stride;
  }
  for (const auto& [name, e] : c.problem().currents) os << "drift " << name << " = " << sci(drift(np, tr, e)) << "\n";
  if (c.problem().lagrangian)
    for (const auto& f : c.problem().fields) {
      const auto& l = c.lagrangian();
      if (!is_symmetry(l, f.field, c.sampling(l.bundle)).symmetric) continue;
      os << "drift noether(" << f.name << ") = " << sci(drift(np, tr, noether_current(l, f.field).components[0])) << "\n";
    }
  return 0;
}

// verify

struct Check {
  enum class State { Pass, Fail, Skip } state = State::Pass;
  std::string detail;
};

Check pass(std::string d = {}) { return {Check::State::Pass, std::move(d)}; }
Check failed(std::string d) { return {Check::State::Fail, std::move(d)}; }
Check skip(std::string d) { return {Check::State::Skip, std::move(d)}; }
Check verdict(bool ok, std::string d = {}) { return ok ? pass() : failed(std::move(d)); }

bool all_zero(const std::vector<Expr>& v) {
  for (const auto& e : v)
    if (!normalize(e).is_zero()) return false;
  return true;
}

class Verifier {
 public:
  Verifier(const Context& c, std::ostream& os) : c_(c), os_(os) {}

  int run() {
    const auto& p = c_.problem();
    if (!p.lagrangian) input_error("verify needs a Lagrangian or a metric");
    const auto& l = *p.lagrangian;
    const auto& b = l.bundle;

    check("euler-lagrange annihilates total derivatives", [&] {
      Expr exact;
      for (int s = 0; s < b.n(); ++s)
        exact = exact + total_derivative(b, b.field(0) * pow(b.base(s), 2) + sin(b.field(b.m() - 1)) * b.field(0), s);
      auto e0 = euler_lagrange(l).components, e1 = euler_lagrange({b, normalize(l.density + exact)}).components;
      std::vector<Expr> d;
      for (std::size_t i = 0; i < e0.size(); ++i) d.push_back(e1[i] - e0[i]);
      return verdict(all_zero(d), "nonzero difference");
    });
    check("helmholtz conditions", [&] {
      JetBundle wide = b.with_order(2 * b.order());
      auto r = helmholtz_check(wide, euler_lagrange(l));
      return verdict(r.pass, r.describe(wide));
    });
    check("first variation formula", [&] {
      ProjectableVectorField f = ProjectableVectorField::zero(b);
      for (int i = 0; i < b.m(); ++i) f.fiber[i] = pow(b.field(i), 2) + b.base(0);
      first_variation_identity(l, bind_variation(b, f));
      return pass();
    });
    for (const auto& f : p.fields) symmetry_checks(l, f);
    second_variation_checks(l);
    if (p.metric) metric_checks(*p.metric);
    for (const auto& bd : p.bindings) binding_check(l, bd);
    if (p.currents.size() && !p.initial.empty()) drift_checks();

    os_ << (failures_ ? "FAILED: " + std::to_string(failures_) + " check(s)\n" : "all checks passed\n");
    return failures_ ? 1 : 0;
  }

 private:
  void check(const std::string& name, const std::function<Check()>& body) {
    Check r;
    try {
      r = body();
    } catch (const InputError&) {
      throw;
    } catch (const std::exception& e) {
      r = failed(e.what());
    }
    switch (r.state) {
      case Check::State::Pass: os_ << "PASS " << name; break;
      case Check::State::Fail:
        os_ << "FAIL " << name;
        ++failures_;
        break;
      case Check::State::Skip: os_ << "SKIP " << name; break;
    }
    std::string d = r.detail;
    while (!d.empty() && d.back() == '\n') d.pop_back();
    if (!d.empty()) os_ << ": " << d;
    os_ << "\n";
  }

  bool can_integrate() const {
    const auto& p = c_.problem();
    if (p.bundle.n() != 1 || p.initial.empty() || !p.functions.empty()) return false;
    for (const auto& name : p.parameters)
      if (!p.values.count(name)) return false;
    return true;
  }

  const Trajectory& trajectory() {
    if (!trajectory_) {
      problem_ = numeric_problem(c_);
      trajectory_ = integrate(*problem_);
    }
    return *trajectory_;
  }

  void symmetry_checks(const Lagrangian& l, const NamedField& f) {
    auto r = is_symmetry(l, f.field, c_.sampling(l.bundle));
    if (!r.symmetric) {
      check("noether identity " + f.name, [&] { return skip("not a symmetry of the Lagrangian"); });
      return;
    }
    Current eps = noether_current(l, f.field);
    check("noether identity " + f.name, [&] {
      Expr res = noether_residual(l, f.field, eps);
      if (res.is_zero()) return pass("symbolic");
      auto num = random_zero_test(res, c_.sampling(l.bundle));
      return verdict(num.zero, "residual " + c_.show(res));
    });
    check("noether drift " + f.name, [&] {
      if (!can_integrate()) return skip("no numeric data");
      double d = drift(*problem_or_build(), trajectory(), eps.components[0]);
      return verdict(d <= 1e-8, "drift " + sci(d) + " > 1e-8");
    });
  }

  const NumericProblem* problem_or_build() {
    trajectory();
    return &*problem_;
  }

  void second_variation_checks(const Lagrangian& l) {
    const auto& v = c_.adjoined();
    int m = l.bundle.m();
    check("second variation routes agree", [&] {
      Lagrangian lp{v.product, l.density};
      Expr iterated = variational_derivative(lp, adjoined_field(v, m), 2);
      Expr diff = normalize(iterated - second_variation(l, v));
      return verdict(all_zero(euler_lagrange({v.product, diff}).components), "difference is not d_H-exact");
    });
    check("deformed lagrangian", [&] {
      auto d = deform(l, v);
      return verdict(all_zero(euler_lagrange({v.product, normalize(d.raw - d.integrated)}).components),
                     "discarded term has nonzero Euler-Lagrange expression");
    });
    check("bianchi identity", [&] {
      auto j = jacobi(l, v);
      auto bi = bianchi(l, v);
      Expr lhs, rhs = divergence(v.product, bi.remainder);
      for (int i = 0; i < m; ++i) {
        lhs = lhs + v.eta.components[i] * j.components[i];
        rhs = rhs + v.eta.components[i] * bi.beta[i];
      }
      return verdict(normalize(lhs - rhs).is_zero(), "eta.J differs from eta.beta + div remainder");
    });
    check("strong conservation", [&] {
      if (l.bundle.n() != 1) return skip("reduction modulo equations needs a single base coordinate");
      auto sys = jacobi(l, v);
      std::vector<int> etas;
      for (int i = 0; i < m; ++i) etas.push_back(m + i);
      std::optional<OnShell> shell;
      try {
        shell.emplace(v.product, sys.components, etas);
      } catch (const Error& e) {
        return skip(std::string("Jacobi system not solvable: ") + e.what());
      }
      Expr div = shell->reduce(divergence(v.product, strong_current(l, v)));
      return verdict(div.is_zero(), "divergence " + c_.show(div));
    });
  }

  void metric_checks(const Metric& g) {
    if (g.dim() > 3) {
      check("geodesic equations", [&] { return skip("symbolic Christoffel symbols need dimension <= 3"); });
      return;
    }
    auto gamma = christoffel(g);
    auto geo = geodesic_equations(g, gamma);
    check("geodesic equations", [&] {
      auto el = euler_lagrange(geodesic_energy(g)).components;
      std::vector<Expr> d;
      for (int k = 0; k < g.dim(); ++k) d.push_back(el[k] - geo[k]);
      return verdict(all_zero(d), "Euler-Lagrange differs from the geodesic equations");
    });
    check("complete lift splits into geodesic and jacobi equations", [&] {
      auto lifted = complete_lift(g, c_.problem().variation);
      auto el = euler_lagrange(geodesic_energy(lifted)).components;
      auto cov = covariant_jacobi(g, c_.problem().variation);
      int n = g.dim();
      std::vector<int> qs;
      for (int k = 0; k < n; ++k) qs.push_back(k);
      OnShell shell(lifted.bundle, geo, qs);
      double worst = 0;
      for (int k = 0; k < n; ++k) {
        if (!normalize(el[n + k] - geo[k]).is_zero()) return failed("lift block " + std::to_string(k) + " is not geodesic");
        std::vector<Expr> terms{el[k]};
        for (int i = 0; i < n; ++i) terms.push_back(g.g[k][i] * cov.components[i]);
        Expr residual = normalize(Expr::add(terms));
        if (!shell.reduce(residual).is_zero()) return failed("jacobi block " + std::to_string(k) + " does not reduce");
        auto num = on_shell_zero_test(residual, shell, c_.sampling(lifted.bundle));
        if (!num.zero) return failed("numeric residual " + sci(num.max_residual));
        worst = std::max(worst, num.max_residual);
      }
      return pass("max on-shell residual " + sci(worst));
    });
    check("deformed lagrangian matches the christoffel form", [&] {
      const auto& v = c_.adjoined();
      auto d = deform(geodesic_energy(g), v);
      const auto& b = v.product;
      int n = g.dim();
      std::vector<Expr> terms;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Expr inner = b.coord(n + i, MultiIndex({1}));
          for (int a = 0; a < n; ++a)
            for (int k = 0; k < n; ++k) inner = inner + gamma[i][a][k] * b.coord(a, MultiIndex({1})) * b.field(n + k);
          terms.push_back(g.g[i][j] * inner * b.coord(j, MultiIndex({1})));
        }
      return verdict(normalize(d.integrated - Expr::add(terms)).is_zero(), "mismatch");
    });
  }

  void binding_check(const Lagrangian& l, const Binding& bd) {
    const auto& v = c_.adjoined();
    int m = l.bundle.m();
    std::map<int, Expr> sec;
    try {
      sec = Context::section(v.product, bd);
    } catch (const InputError& e) {
      check("binding " + bd.name, [&] { return failed(e.message); });
      return;
    }
    for (int i = 0; i < m; ++i)
      if (!sec.count(i)) {
        check("binding " + bd.name, [&] { return skip("does not give every field"); });
        return;
      }
    if (static_cast<int>(sec.size()) == m) {
      check("critical section " + bd.name, [&] {
        auto r = vanishes_along(l.bundle, euler_lagrange(l).components, sec, c_.sampling(l.bundle));
        return verdict(r.in_kernel, "Euler-Lagrange residual " + sci(r.numeric.max_residual));
      });
      return;
    }
    check("jacobi and bianchi agree along " + bd.name, [&] {
      if (static_cast<int>(sec.size()) != v.product.m()) return skip("binding must give every variation field");
      auto crit = vanishes_along(l.bundle, euler_lagrange(l).components,
                                 std::map<int, Expr>(sec.begin(), std::next(sec.begin(), m)), c_.sampling(l.bundle));
      if (!crit.in_kernel) return failed("the bound section is not critical");
      auto sampling = c_.sampling(v.product);
      auto k = jacobi_kernel_test(jacobi(l, v), sec, sampling);
      auto b = vanishes_along(v.product, bianchi(l, v).beta, sec, sampling);
      std::string what = k.in_kernel ? "in kernel" : "not in kernel, residual " + sci(k.numeric.max_residual);
      return verdict(k.in_kernel == b.in_kernel, "jacobi " + what + " but bianchi disagrees");
    });
  }

  void drift_checks() {
    for (const auto& [name, e] : c_.problem().currents)
      check("drift " + name, [&] {
        if (!can_integrate()) return skip("no numeric data");
        double d = drift(*problem_or_build(), trajectory(), e);
        return verdict(d <= 1e-8, "drift " + sci(d) + " > 1e-8");
      });
  }

  const Context& c_;
  std::ostream& os_;
  int failures_ = 0;
  std::optional<NumericProblem> problem_;
  std::optional<Trajectory> trajectory_;
};

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"el",      "momenta",          "noether",        "symmetry",
                                              "helmholtz", "deform",         "jacobi",         "bianchi",
                                              "second-variation", "strong-current", "complete-lift", "integrate",
                                              "verify"};
  return names;
}

Outcome run(const std::string& subcommand, const Problem& problem, const Options& options) {
  Outcome out;
  std::ostringstream os, err;
  Context c(problem, options);
  try {
    if (subcommand == "el") out.code = cmd_el(c, os);
    else if (subcommand == "momenta") out.code = cmd_momenta(c, os);
    else if (subcommand == "noether") out.code = cmd_noether(c, os, err);
    else if (subcommand == "symmetry") out.code = cmd_symmetry(c, os);
    else if (subcommand == "helmholtz") out.code = cmd_helmholtz(c, os);
    else if (subcommand == "deform") out.code = cmd_deform(c, os);
    else if (subcommand == "jacobi") out.code = cmd_jacobi(c, os);
    else if (subcommand == "bianchi") out.code = cmd_bianchi(c, os);
    else if (subcommand == "second-variation") out.code = cmd_second_variation(c, os);
    else if (subcommand == "strong-current") out.code = cmd_strong_current(c, os);
    else if (subcommand == "complete-lift") out.code = cmd_complete_lift(c, os);
    else if (subcommand == "integrate") out.code = cmd_integrate(c, os);
    else if (subcommand == "verify") out.code = Verifier(c, os).run();
    else input_error("unknown subcommand '" + subcommand + "'");
  } catch (const InputError& e) {
    err << "error: " << e.message << "\n";
    out.code = 2;
  } catch (const std::exception& e) {
    err << "error in " << subcommand << ": " << e.what() << "\n";
    out.code = 2;
  }
  out.out = os.str();
  out.err = err.str();
  return out;
}

}  // namespace jetvar::cli
