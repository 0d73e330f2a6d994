#include "jetvar/lift.hpp"

#include <functional>
#include <set>

namespace jetvar {

namespace {

void visit_opaque(const Expr& e, const std::function<void(const Expr&)>& f, std::set<const Node*>& seen) {
  if (!seen.insert(e.node()).second) return;
  if (e.kind() == Kind::Opaque) f(e);
  for (const auto& a : e.args()) visit_opaque(a, f, seen);
}

std::vector<Expr> base_symbols(const JetBundle& bundle) {
  std::vector<Expr> out;
  for (int s = 0; s < bundle.n(); ++s) out.push_back(bundle.base(s));
  return out;
}

// Applies a field given by coordinate components to a function.
Expr apply_field(const JetBundle& bundle, const std::vector<Expr>& base, const std::map<JetKey, Expr>& fiber,
                 const Expr& f) {
  std::vector<Expr> terms;
  for (int s = 0; s < bundle.n() && s < static_cast<int>(base.size()); ++s)
    if (!base[s].is_zero()) terms.push_back(base[s] * partial(f, bundle.base(s)));
  for (const auto& k : jet_keys(bundle, f)) {
    auto it = fiber.find(k);
    if (it != fiber.end() && !it->second.is_zero()) terms.push_back(it->second * partial(f, bundle.coord(k)));
  }
  return normalize(Expr::add(std::move(terms)));
}

}  // namespace

ProjectableVectorField ProjectableVectorField::zero(const JetBundle& bundle) {
  return {std::vector<Expr>(bundle.n(), Expr(0)), std::vector<Expr>(bundle.m(), Expr(0))};
}

void ProjectableVectorField::validate(const JetBundle& bundle) const {
  if (static_cast<int>(base.size()) != bundle.n()) throw Error("vector field needs one base component per base coordinate");
  if (static_cast<int>(fiber.size()) != bundle.m()) throw Error("vector field needs one fiber component per field");
  for (const auto& c : base)
    for (const auto& s : free_symbols(c))
      if (s.symbol().cls == SymbolClass::Jet)
        throw Error("base component depends on fiber coordinate '" + s.symbol().name + "'; field is not projectable");
  for (const auto& c : fiber)
    for (const auto& s : free_symbols(c))
      if (s.symbol().cls == SymbolClass::Jet && s.symbol().order() > 0)
        throw Error("fiber component depends on derivative '" + s.symbol().name + "'");
}

std::vector<Expr> vertical_part(const JetBundle& bundle, const ProjectableVectorField& field) {
  std::vector<Expr> out;
  for (int i = 0; i < bundle.m(); ++i) {
    std::vector<Expr> terms{i < static_cast<int>(field.fiber.size()) ? field.fiber[i] : Expr(0)};
    for (int s = 0; s < bundle.n(); ++s)
      terms.push_back(-(bundle.coord(i, bundle.unit(s)) * field.base[s]));
    out.push_back(normalize(Expr::add(std::move(terms))));
  }
  return out;
}

ProlongedField prolong(const JetBundle& bundle, const ProjectableVectorField& field, int s) {
  ProlongedField out;
  out.base = field.base;
  auto q = vertical_part(bundle, field);
  for (int i = 0; i < bundle.m(); ++i) {
    std::map<MultiIndex, Expr> dq;
    for (const auto& alpha : multi_indices(bundle.n(), s)) {
      Expr d;
      if (alpha.order() == 0) {
        d = q[i];
      } else {
        int sigma = 0;
        while (alpha[sigma] == 0) ++sigma;
        d = total_derivative(bundle, dq.at(alpha - bundle.unit(sigma)), sigma);
      }
      dq.emplace(alpha, d);
      std::vector<Expr> terms{d};
      for (int sg = 0; sg < bundle.n(); ++sg) terms.push_back(bundle.coord(i, alpha + bundle.unit(sg)) * field.base[sg]);
      out.fiber[{i, alpha}] = normalize(Expr::add(std::move(terms)));
    }
  }
  return out;
}

JetVectorField split_HV(const JetBundle& bundle, const ProjectableVectorField& field, int s) {
  JetVectorField u;
  u.horizontal = field.base;
  auto q = vertical_part(bundle, field);
  VariationField eta{q};
  return JetVectorField{field.base, as_vertical_field(bundle, eta, s).vertical};
}

std::vector<Expr> lie_components(const JetBundle& bundle, const ProjectableVectorField& field) {
  std::vector<Expr> out;
  for (const auto& q : vertical_part(bundle, field)) out.push_back(normalize(-q));
  return out;
}

std::vector<Expr> lie_derivative(const JetBundle& bundle, const ProjectableVectorField& field,
                                 const std::map<int, Expr>& section) {
  std::vector<Expr> out;
  for (const auto& c : lie_components(bundle, field)) out.push_back(pullback(bundle, c, section));
  return out;
}

ProjectableVectorField bracket(const JetBundle& bundle, const ProjectableVectorField& a,
                               const ProjectableVectorField& b) {
  std::map<JetKey, Expr> fa, fb;
  for (int i = 0; i < bundle.m(); ++i) {
    fa[{i, bundle.zero()}] = a.fiber[i];
    fb[{i, bundle.zero()}] = b.fiber[i];
  }
  ProjectableVectorField out;
  for (int s = 0; s < bundle.n(); ++s)
    out.base.push_back(normalize(apply_field(bundle, a.base, fa, b.base[s]) - apply_field(bundle, b.base, fb, a.base[s])));
  for (int i = 0; i < bundle.m(); ++i)
    out.fiber.push_back(
        normalize(apply_field(bundle, a.base, fa, b.fiber[i]) - apply_field(bundle, b.base, fb, a.fiber[i])));
  return out;
}

ProlongedField bracket(const JetBundle& bundle, const ProlongedField& a, const ProlongedField& b) {
  ProlongedField out;
  for (int s = 0; s < bundle.n(); ++s)
    out.base.push_back(normalize(apply_field(bundle, a.base, a.fiber, b.base[s]) -
                                 apply_field(bundle, b.base, b.fiber, a.base[s])));
  for (const auto& [k, bv] : b.fiber) {
    auto it = a.fiber.find(k);
    Expr av = it == a.fiber.end() ? Expr(0) : it->second;
    out.fiber[k] = normalize(apply_field(bundle, a.base, a.fiber, bv) - apply_field(bundle, b.base, b.fiber, av));
  }
  return out;
}

Expr xi_atom(const JetBundle& bundle, const LiftRule& rule, int sigma, const MultiIndex& derivative) {
  return Expr::opaque(rule.xi_names.at(sigma), base_symbols(bundle), derivative.counts());
}

ProjectableVectorField apply_lift(const JetBundle& bundle, const LiftRule& rule, const std::vector<Expr>& xi) {
  if (static_cast<int>(xi.size()) != bundle.n() || static_cast<int>(rule.xi_names.size()) != bundle.n())
    throw Error("lift order mismatch: expected " + std::to_string(bundle.n()) + " base components");
  if (static_cast<int>(rule.fiber.size()) != bundle.m()) throw Error("lift rule does not match the fields");
  std::set<std::string> names(rule.xi_names.begin(), rule.xi_names.end());
  for (const auto& t : rule.fiber) {
    std::set<const Node*> seen;
    visit_opaque(
        t,
        [&](const Expr& atom) {
          if (!names.count(atom.name())) return;
          int order = 0;
          for (int d : atom.derivs()) order += d;
          if (order > rule.k) throw Error("lift order mismatch: rule '" + rule.name + "' uses derivatives of order " +
                                          std::to_string(order) + " > " + std::to_string(rule.k));
        },
        seen);
  }
  ProjectableVectorField out;
  out.base = xi;
  auto params = base_symbols(bundle);
  for (const auto& t : rule.fiber) {
    Expr c = t;
    for (int s = 0; s < bundle.n(); ++s) c = substitute_function(c, rule.xi_names[s], params, xi[s]);
    out.fiber.push_back(c);
  }
  return out;
}

namespace {

LiftRule blank_rule(const JetBundle& bundle, const std::string& name) {
  LiftRule r;
  r.name = name;
  for (int s = 0; s < bundle.n(); ++s) r.xi_names.push_back(bundle.n() == 1 ? "xi" : "xi" + std::to_string(s + 1));
  r.r = 0;
  r.k = 1;
  return r;
}

}  // namespace

LiftRule tangent_rule(const JetBundle& bundle) {
  int n = bundle.n();
  if (bundle.m() != n) throw Error("tangent lift needs as many fields as base coordinates");
  LiftRule r = blank_rule(bundle, "tangent");
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < n; ++j) terms.push_back(bundle.field(j) * xi_atom(bundle, r, i, bundle.unit(j)));
    r.fiber.push_back(normalize(Expr::add(std::move(terms))));
  }
  return r;
}

LiftRule cotangent_rule(const JetBundle& bundle) {
  int n = bundle.n();
  if (bundle.m() != n) throw Error("cotangent lift needs as many fields as base coordinates");
  LiftRule r = blank_rule(bundle, "cotangent");
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < n; ++j) terms.push_back(-(bundle.field(j) * xi_atom(bundle, r, j, bundle.unit(i))));
    r.fiber.push_back(normalize(Expr::add(std::move(terms))));
  }
  return r;
}

LiftRule covariant2_rule(const JetBundle& bundle) {
  int n = bundle.n();
  if (bundle.m() != n * (n + 1) / 2) throw Error("rank-2 covariant lift needs n(n+1)/2 fields");
  auto index = [n](int i, int j) {
    if (i > j) std::swap(i, j);
    return i * n - i * (i - 1) / 2 + (j - i);
  };
  LiftRule r = blank_rule(bundle, "covariant2");
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      std::vector<Expr> terms;
      for (int k = 0; k < n; ++k) {
        terms.push_back(-(bundle.field(index(k, j)) * xi_atom(bundle, r, k, bundle.unit(i))));
        terms.push_back(-(bundle.field(index(i, k)) * xi_atom(bundle, r, k, bundle.unit(j))));
      }
      r.fiber.push_back(normalize(Expr::add(std::move(terms))));
    }
  }
  return r;
}

AdjoinedVariation adjoin_variation(const JetBundle& bundle, std::vector<std::string> names) {
  JetBundle product = bundle.adjoin(std::move(names));
  VariationField eta;
  for (int i = 0; i < bundle.m(); ++i) eta.components.push_back(product.field(bundle.m() + i));
  return {product, eta};
}

VariationField bind_variation(const JetBundle& bundle, const ProjectableVectorField& field) {
  return {vertical_part(bundle, field)};
}

Expr prolonged_component(const JetBundle& bundle, const VariationField& eta, int field, const MultiIndex& alpha) {
  return total_derivative(bundle, eta.components.at(field), alpha);
}

JetVectorField as_vertical_field(const JetBundle& bundle, const VariationField& eta, int s) {
  JetVectorField u;
  u.horizontal.assign(bundle.n(), Expr(0));
  for (int i = 0; i < static_cast<int>(eta.components.size()); ++i) {
    std::map<MultiIndex, Expr> d;
    for (const auto& alpha : multi_indices(bundle.n(), s)) {
      Expr v;
      if (alpha.order() == 0) {
        v = normalize(eta.components[i]);
      } else {
        int sigma = 0;
        while (alpha[sigma] == 0) ++sigma;
        v = total_derivative(bundle, d.at(alpha - bundle.unit(sigma)), sigma);
      }
      d.emplace(alpha, v);
      if (!v.is_zero()) u.vertical[{i, alpha}] = v;
    }
  }
  return u;
}

VariationField tangent_variation(const JetBundle& bundle, const Expr& xi0, const std::vector<Expr>& xi) {
  if (bundle.n() != 1) throw Error("tangent variation is defined on mechanics bundles");
  VariationField out;
  for (int i = 0; i < static_cast<int>(xi.size()); ++i)
    out.components.push_back(normalize(xi[i] - bundle.coord(i, bundle.unit(0)) * xi0));
  return out;
}

}  // namespace jetvar
