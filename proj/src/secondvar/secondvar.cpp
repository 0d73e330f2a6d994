#include "jetvar/secondvar.hpp"

#include "jetvar/syntax.hpp"

namespace jetvar {

namespace {

std::vector<int> first_fields(int m) {
  std::vector<int> out;
  for (int i = 0; i < m; ++i) out.push_back(i);
  return out;
}

Expr sum(std::vector<Expr> terms) { return normalize(Expr::add(std::move(terms))); }

// D_Delta(Q) + D_Q^*(Delta) for the first delta.size() fields.
SourceForm vary_source(const JetBundle& b, const SourceForm& delta, const std::vector<Expr>& q) {
  int m = static_cast<int>(delta.components.size());
  SourceForm out;
  for (int i = 0; i < m; ++i) {
    std::vector<Expr> terms;
    for (const auto& k : jet_keys(b, delta.components[i]))
      if (k.field < m) terms.push_back(partial(delta.components[i], b.coord(k)) * total_derivative(b, q[k.field], k.alpha));
    for (int j = 0; j < m; ++j) {
      for (const auto& k : jet_keys(b, q[j])) {
        if (k.field != i) continue;
        Expr t = total_derivative(b, delta.components[j] * partial(q[j], b.coord(k)), k.alpha);
        terms.push_back(k.alpha.order() % 2 ? -t : t);
      }
    }
    out.components.push_back(sum(std::move(terms)));
  }
  return out;
}

Lagrangian on(const Lagrangian& lambda, const JetBundle& bundle) { return {bundle, lambda.density}; }

}  // namespace

ProjectableVectorField adjoined_field(const AdjoinedVariation& v, int original_fields) {
  auto f = ProjectableVectorField::zero(v.product);
  for (int i = 0; i < original_fields; ++i) f.fiber[i] = v.eta.components.at(i);
  return f;
}

Expr variational_derivative(const Lagrangian& lambda, const ProjectableVectorField& field, int i) {
  if (i < 1 || i > 2) throw Error("unsupported variation order " + std::to_string(i) + " (1 or 2)");
  Expr d = lie_derivative_density(lambda, field);
  if (i == 2) d = lie_derivative_density({lambda.bundle, d}, field);
  return d;
}

SourceForm variational_derivative(const JetBundle& bundle, const SourceForm& delta,
                                  const ProjectableVectorField& field, int i) {
  if (i < 1 || i > 2) throw Error("unsupported variation order " + std::to_string(i) + " (1 or 2)");
  field.validate(bundle);
  auto q = vertical_part(bundle, field);
  SourceForm d = vary_source(bundle, delta, q);
  if (i == 2) d = vary_source(bundle, d, q);
  return d;
}

Expr second_variation(const Lagrangian& lambda, const AdjoinedVariation& v) {
  int m = lambda.bundle.m();
  auto fs = first_fields(m);
  Lagrangian lp = on(lambda, v.product);
  Expr inner = contract_source(euler_lagrange(lp, fs), v.eta);
  return contract_source(euler_lagrange({v.product, inner}, fs), v.eta);
}

DeformedLagrangian deform(const Lagrangian& lambda, const JetBundle& bundle, const VariationField& eta) {
  auto fs = first_fields(lambda.bundle.m());
  Lagrangian lp = on(lambda, bundle);
  DeformedLagrangian out;
  out.raw = contract_source(euler_lagrange(lp, fs), eta);
  out.integrated = vertical_contraction(lp, eta, fs);
  out.discarded = contract_momenta(bundle, momenta(lp, fs), eta, fs);
  Expr check = normalize(out.raw - out.integrated + divergence(bundle, out.discarded));
  if (!check.is_zero()) throw Error("decomposition failure: residual " + to_plain(check));
  return out;
}

DeformedLagrangian deform(const Lagrangian& lambda, const AdjoinedVariation& v) {
  return deform(lambda, v.product, v.eta);
}

JacobiSystem jacobi(const Lagrangian& lambda, const AdjoinedVariation& v) {
  int m = lambda.bundle.m();
  const auto& b = v.product;
  auto e = euler_lagrange(on(lambda, b), first_fields(m));
  JacobiSystem out{b, v.eta, {}};
  for (const auto& ei : e.components) {
    std::vector<Expr> terms;
    for (const auto& k : jet_keys(b, ei))
      if (k.field < m) terms.push_back(partial(ei, b.coord(k)) * total_derivative(b, v.eta.components[k.field], k.alpha));
    out.components.push_back(sum(std::move(terms)));
  }
  return out;
}

JacobiSystem jacobi(const Lagrangian& lambda) { return jacobi(lambda, adjoin_variation(lambda.bundle)); }

BianchiForm bianchi(const Lagrangian& lambda, const AdjoinedVariation& v) {
  int m = lambda.bundle.m();
  auto fs = first_fields(m);
  Lagrangian omega{v.product, deform(lambda, v).raw};
  BianchiForm out;
  out.beta = euler_lagrange(omega, fs).components;
  out.remainder = contract_momenta(v.product, momenta(omega, fs), v.eta, fs);
  return out;
}

Current strong_current(const Lagrangian& lambda, const AdjoinedVariation& v) {
  int m = lambda.bundle.m();
  auto fs = first_fields(m);
  Lagrangian omega{v.product, deform(lambda, v).raw};
  return contract_momenta(v.product, momenta(omega, fs), v.eta, fs);
}

KernelReport vanishes_along(const JetBundle& bundle, const std::vector<Expr>& components,
                            const std::map<int, Expr>& section, const SamplingOptions& options) {
  KernelReport r;
  r.symbolic = true;
  for (const auto& c : components) {
    r.pulled_back.push_back(pullback(bundle, c, section));
    if (!r.pulled_back.back().is_zero()) r.symbolic = false;
  }
  if (r.symbolic) {
    r.in_kernel = true;
    return r;
  }
  r.in_kernel = true;
  for (const auto& c : r.pulled_back) {
    auto rep = random_zero_test(c, options);
    if (!rep.failure.empty() || !rep.zero) r.in_kernel = false;
    if (r.numeric.expression.empty() || rep.max_residual > r.numeric.max_residual || !rep.failure.empty())
      r.numeric = rep;
  }
  return r;
}

KernelReport jacobi_kernel_test(const JacobiSystem& system, const std::map<int, Expr>& section,
                                const SamplingOptions& options) {
  return vanishes_along(system.bundle, system.components, section, options);
}

}  // namespace jetvar
