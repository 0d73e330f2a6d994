#include "jetvar/varcalc.hpp"

#include <sstream>

#include "jetvar/matrix.hpp"
#include "jetvar/syntax.hpp"

namespace jetvar {

namespace {

std::vector<int> pick_fields(const JetBundle& bundle, const std::optional<std::vector<int>>& fields) {
  return fields ? *fields : all_fields(bundle);
}

// Multi-indices a with dL/dy^i_a possibly nonzero.
std::vector<MultiIndex> orders_of(const JetBundle& bundle, const Expr& e, int field) {
  std::vector<MultiIndex> out;
  for (const auto& k : jet_keys(bundle, e))
    if (k.field == field) out.push_back(k.alpha);
  return out;
}

Expr sum(std::vector<Expr> terms) { return normalize(Expr::add(std::move(terms))); }

}  // namespace

std::vector<int> all_fields(const JetBundle& bundle) {
  std::vector<int> out;
  for (int i = 0; i < bundle.m(); ++i) out.push_back(i);
  return out;
}

SourceForm euler_lagrange(const Lagrangian& lambda, std::optional<std::vector<int>> fields) {
  const auto& b = lambda.bundle;
  Expr L = normalize(lambda.density);
  SourceForm out;
  for (int i : pick_fields(b, fields)) {
    std::vector<Expr> terms;
    for (const auto& alpha : orders_of(b, L, i)) {
      Expr d = total_derivative(b, partial(L, b.coord(i, alpha)), alpha);
      terms.push_back(alpha.order() % 2 ? -d : d);
    }
    out.components.push_back(sum(std::move(terms)));
  }
  return out;
}

MomentaTable momenta(const Lagrangian& lambda, std::optional<std::vector<int>> fields) {
  const auto& b = lambda.bundle;
  Expr L = normalize(lambda.density);
  int s = lambda.order();
  MomentaTable p;
  for (int i : pick_fields(b, fields)) {
    // q^a = dL/dy^i_a - D_nu p^{a nu}, from the top order down.
    for (int order = s; order >= 1; --order) {
      for (const auto& alpha : multi_indices(b.n(), order)) {
        if (alpha.order() != order) continue;
        std::vector<Expr> terms{partial(L, b.coord(i, alpha))};
        for (int nu = 0; nu < b.n(); ++nu) {
          auto it = p.find({i, alpha, nu});
          if (it != p.end()) terms.push_back(-total_derivative(b, it->second, nu));
        }
        Expr q = sum(std::move(terms));
        for (int mu = 0; mu < b.n(); ++mu) {
          if (alpha[mu] == 0) continue;
          Expr share = normalize(q * Expr(Rational(alpha[mu], order)));
          p[{i, alpha - b.unit(mu), mu}] = share;
        }
      }
    }
  }
  for (auto it = p.begin(); it != p.end();) it = it->second.is_zero() ? p.erase(it) : std::next(it);
  return p;
}

Current contract_momenta(const JetBundle& bundle, const MomentaTable& p, const VariationField& eta,
                         std::optional<std::vector<int>> fields) {
  auto fs = pick_fields(bundle, fields);
  std::map<int, int> position;
  for (int k = 0; k < static_cast<int>(fs.size()); ++k) position[fs[k]] = k;
  std::vector<std::vector<Expr>> terms(bundle.n());
  for (const auto& [key, value] : p) {
    auto it = position.find(key.field);
    if (it == position.end()) continue;
    Expr d = total_derivative(bundle, eta.components.at(it->second), key.beta);
    terms[key.mu].push_back(d * value);
  }
  Current c;
  for (auto& t : terms) c.components.push_back(sum(std::move(t)));
  return c;
}

Expr divergence(const JetBundle& bundle, const Current& c) {
  std::vector<Expr> terms;
  for (int mu = 0; mu < bundle.n() && mu < static_cast<int>(c.components.size()); ++mu)
    terms.push_back(total_derivative(bundle, c.components[mu], mu));
  return sum(std::move(terms));
}

Expr contract_source(const SourceForm& delta, const VariationField& eta) {
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < delta.components.size() && i < eta.components.size(); ++i)
    terms.push_back(eta.components[i] * delta.components[i]);
  return sum(std::move(terms));
}

Expr vertical_contraction(const Lagrangian& lambda, const VariationField& eta, std::optional<std::vector<int>> fields) {
  const auto& b = lambda.bundle;
  Expr L = normalize(lambda.density);
  auto fs = pick_fields(b, fields);
  std::vector<Expr> terms;
  for (int k = 0; k < static_cast<int>(fs.size()); ++k)
    for (const auto& alpha : orders_of(b, L, fs[k]))
      terms.push_back(total_derivative(b, eta.components.at(k), alpha) * partial(L, b.coord(fs[k], alpha)));
  return sum(std::move(terms));
}

FirstVariation first_variation_identity(const Lagrangian& lambda, const VariationField& eta) {
  FirstVariation fv;
  const auto& b = lambda.bundle;
  int m = std::min<int>(b.m(), eta.components.size());
  std::vector<int> fs;
  for (int i = 0; i < m; ++i) fs.push_back(i);
  fv.variation = vertical_contraction(lambda, eta, fs);
  fv.source = contract_source(euler_lagrange(lambda, fs), eta);
  fv.boundary = contract_momenta(b, momenta(lambda, fs), eta, fs);
  fv.residual = normalize(fv.variation - fv.source - divergence(b, fv.boundary));
  if (!fv.residual.is_zero()) throw Error("decomposition failure: residual " + to_plain(fv.residual));
  return fv;
}

Expr lie_derivative_density(const Lagrangian& lambda, const ProjectableVectorField& field) {
  const auto& b = lambda.bundle;
  field.validate(b);
  Expr L = normalize(lambda.density);
  std::vector<Expr> terms;
  for (int s = 0; s < b.n(); ++s)
    if (!field.base[s].is_zero()) terms.push_back(total_derivative(b, field.base[s] * L, s));
  terms.push_back(vertical_contraction(lambda, VariationField{vertical_part(b, field)}));
  return sum(std::move(terms));
}

SymmetryReport is_symmetry(const Lagrangian& lambda, const ProjectableVectorField& field,
                           const SamplingOptions& options) {
  SymmetryReport r;
  r.lie_derivative = lie_derivative_density(lambda, field);
  if (r.lie_derivative.is_zero()) {
    r.symmetric = true;
    r.decided_by = SymmetryReport::Path::Symbolic;
    return r;
  }
  r.decided_by = SymmetryReport::Path::Numeric;
  r.numeric = random_zero_test(r.lie_derivative, sampling_for(lambda.bundle, options));
  r.symmetric = r.numeric.zero;
  return r;
}

Current noether_current(const Lagrangian& lambda, const ProjectableVectorField& field) {
  const auto& b = lambda.bundle;
  field.validate(b);
  Current c = contract_momenta(b, momenta(lambda), VariationField{vertical_part(b, field)});
  Expr L = normalize(lambda.density);
  for (int mu = 0; mu < b.n(); ++mu) c.components[mu] = normalize(c.components[mu] + field.base[mu] * L);
  return c;
}

Expr noether_residual(const Lagrangian& lambda, const ProjectableVectorField& field, const Current& eps) {
  const auto& b = lambda.bundle;
  Expr source = contract_source(euler_lagrange(lambda), VariationField{vertical_part(b, field)});
  return normalize(source + divergence(b, eps));
}

std::string HelmholtzReport::describe(const JetBundle& bundle) const {
  if (pass) return "Helmholtz conditions hold";
  std::ostringstream os;
  for (const auto& v : violations) {
    os << "violated: H(" << bundle.field_name(v.i) << ", " << bundle.field_name(v.j) << "; ";
    std::string order;
    for (int s = 0; s < bundle.n(); ++s)
      for (int k = 0; k < v.beta[s]; ++k) order += bundle.base_name(s);
    os << (order.empty() ? "0" : order) << ") = " << to_plain(v.value) << "\n";
  }
  return os.str();
}

HelmholtzReport helmholtz_check(const JetBundle& bundle, const SourceForm& delta) {
  HelmholtzReport r;
  int m = static_cast<int>(delta.components.size());
  int order = 0;
  for (const auto& d : delta.components) order = std::max(order, jet_order(bundle, d));
  auto indices = multi_indices(bundle.n(), order);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (const auto& beta : indices) {
        std::vector<Expr> terms{partial(delta.components[i], bundle.coord(j, beta))};
        for (const auto& gamma : indices) {
          if (!beta.divides(gamma)) continue;
          Expr d = partial(delta.components[j], bundle.coord(i, gamma));
          if (d.is_zero()) continue;
          Expr t = total_derivative(bundle, d, gamma - beta) * Expr(Rational(binomial(gamma, beta)));
          terms.push_back(gamma.order() % 2 ? t : -t);
        }
        Expr h = sum(std::move(terms));
        if (!h.is_zero()) {
          r.pass = false;
          r.violations.push_back({i, j, beta, h});
        }
      }
    }
  }
  return r;
}

OnShell::OnShell(const JetBundle& bundle, const std::vector<Expr>& equations, std::optional<std::vector<int>> fields)
    : bundle_(bundle), fields_(pick_fields(bundle, fields)) {
  if (bundle.n() != 1) throw Error("on-shell reduction is implemented for mechanics bundles");
  if (fields_.size() != equations.size()) throw Error("on-shell reduction needs one equation per field");
  int r = 0;
  for (const auto& e : equations)
    for (const auto& k : jet_keys(bundle, e))
      if (std::find(fields_.begin(), fields_.end(), k.field) != fields_.end()) r = std::max(r, k.alpha.order());
  if (r == 0) throw Error("equations contain no derivatives to solve for");
  order_ = r;
  int m = static_cast<int>(fields_.size());
  MultiIndex top({r});
  Matrix a = zero_matrix(m, m);
  std::vector<Expr> rest;
  Bindings zero_tops;
  for (int j : fields_) zero_tops[bundle.coord_name(j, top)] = Expr(0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) a[i][j] = partial(equations[i], bundle.coord(fields_[j], top));
    rest.push_back(substitute(equations[i], zero_tops));
  }
  for (const auto& row : a)
    for (const auto& v : row)
      for (const auto& k : jet_keys(bundle, v))
        if (k.alpha.order() >= r && std::find(fields_.begin(), fields_.end(), k.field) != fields_.end())
          throw Error("equations are not linear in their highest derivatives");
  Matrix inv = inverse(a);
  for (int i = 0; i < m; ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < m; ++j) terms.push_back(-(inv[i][j] * rest[j]));
    solved_[{i, r}] = sum(std::move(terms));
  }
}

Expr OnShell::solved(int position, int k) const {
  if (k < order_) throw Error("on-shell value requested below the solved order");
  auto it = solved_.find({position, k});
  if (it != solved_.end()) return it->second;
  Expr v = reduce(total_derivative(bundle_, solved(position, k - 1), 0));
  solved_[{position, k}] = v;
  return v;
}

std::vector<std::pair<JetKey, int>> OnShell::eliminated(const Expr& e) const {
  std::vector<std::pair<JetKey, int>> out;
  for (const auto& k : jet_keys(bundle_, e)) {
    if (k.alpha.order() < order_) continue;
    auto pos = std::find(fields_.begin(), fields_.end(), k.field);
    if (pos != fields_.end()) out.emplace_back(k, static_cast<int>(pos - fields_.begin()));
  }
  return out;
}

Expr OnShell::reduce(const Expr& e) const {
  Bindings b;
  for (const auto& [k, pos] : eliminated(e)) b[bundle_.coord_name(k.field, k.alpha)] = solved(pos, k.alpha.order());
  return b.empty() ? normalize(e) : substitute(e, b);
}

IdentityReport on_shell_zero_test(const Expr& e, const OnShell& shell, SamplingOptions options) {
  std::vector<std::pair<std::string, Expr>> values;
  for (const auto& [k, pos] : shell.eliminated(e))
    values.emplace_back(shell.bundle().coord_name(k.field, k.alpha), shell.solved(pos, k.alpha.order()));
  auto previous = options.complete;
  options.complete = [values, previous](Env& env) {
    if (previous) previous(env);
    for (const auto& [name, v] : values) env.values[name] = eval(v, env);
  };
  return random_zero_test(e, options);
}

}  // namespace jetvar
