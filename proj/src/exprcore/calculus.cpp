#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

#include "jetvar/expr.hpp"

namespace jetvar {

namespace {

class Differentiator {
 public:
  Differentiator(std::function<Expr(const Expr&)> leaf, std::uint64_t mask) : leaf_(std::move(leaf)), mask_(mask) {}

  Expr d(const Expr& e) {
    if ((e.symbol_mask() & mask_) == 0) return Expr(0);
    switch (e.kind()) {
      case Kind::Number:
        return Expr(0);
      case Kind::Symbol:
        return leaf_(e);
      default:
        break;
    }
    auto it = memo_.find(e.node());
    if (it != memo_.end()) return it->second;
    Expr r = compute(e);
    memo_.emplace(e.node(), r);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Add: {
        std::vector<Expr> terms;
        for (const auto& t : e.args()) terms.push_back(d(t));
        return Expr::add(std::move(terms));
      }
      case Kind::Mul: {
        std::vector<Expr> terms;
        auto f = e.args();
        for (std::size_t i = 0; i < f.size(); ++i) {
          Expr di = d(f[i]);
          if (di.is_zero()) continue;
          std::vector<Expr> prod;
          for (std::size_t j = 0; j < f.size(); ++j) prod.push_back(j == i ? di : f[j]);
          terms.push_back(Expr::mul(std::move(prod)));
        }
        return Expr::add(std::move(terms));
      }
      case Kind::Pow: {
        Expr db = d(e.base());
        if (db.is_zero()) return Expr(0);
        int k = e.exponent();
        return Expr::mul({Expr(k), Expr::pow(e.base(), k - 1), db});
      }
      case Kind::Func: {
        const Expr& a = e.base();
        Expr da = d(a);
        if (da.is_zero()) return Expr(0);
        Expr outer;
        switch (e.fn()) {
          case Fn::Sin: outer = cos(a); break;
          case Fn::Cos: outer = -sin(a); break;
          case Fn::Tan: outer = Expr(1) + pow(e, 2); break;
          case Fn::Exp: outer = e; break;
          case Fn::Log: outer = pow(a, -1); break;
          case Fn::Sqrt: outer = Expr(Rational(1, 2)) * pow(e, -1); break;
        }
        return outer * da;
      }
      case Kind::Opaque: {
        std::vector<Expr> terms;
        auto args = e.args();
        for (std::size_t j = 0; j < args.size(); ++j) {
          Expr da = d(args[j]);
          if (da.is_zero()) continue;
          std::vector<int> derivs(e.derivs().begin(), e.derivs().end());
          ++derivs[j];
          terms.push_back(Expr::opaque(e.name(), {args.begin(), args.end()}, std::move(derivs)) * da);
        }
        return Expr::add(std::move(terms));
      }
      default:
        return Expr(0);
    }
  }

  std::function<Expr(const Expr&)> leaf_;
  std::uint64_t mask_;
  std::unordered_map<const Node*, Expr> memo_;
};

void collect_symbols(const Expr& e, std::set<Expr, ExprLess>& out, std::set<const Node*>& seen) {
  if (!seen.insert(e.node()).second) return;
  if (e.is_symbol()) {
    out.insert(e);
    return;
  }
  for (const auto& a : e.args()) collect_symbols(a, out, seen);
}

Expr rebuild(const Expr& e, std::vector<Expr> args) {
  switch (e.kind()) {
    case Kind::Add: return Expr::add(std::move(args));
    case Kind::Mul: return Expr::mul(std::move(args));
    case Kind::Pow: return Expr::pow(args[0], e.exponent());
    case Kind::Func: return Expr::func(e.fn(), args[0]);
    case Kind::Opaque:
      return Expr::opaque(e.name(), std::move(args), std::vector<int>(e.derivs().begin(), e.derivs().end()));
    default: return e;
  }
}

template <class Leaf>
class Rewriter {
 public:
  explicit Rewriter(Leaf leaf) : leaf_(std::move(leaf)) {}

  Expr run(const Expr& e) {
    if (e.is_number()) return e;
    if (e.is_symbol()) return leaf_(e);
    auto it = memo_.find(e.node());
    if (it != memo_.end()) return it->second;
    Expr r;
    if (e.kind() == Kind::Opaque && opaque_) {
      std::vector<Expr> args;
      for (const auto& a : e.args()) args.push_back(run(a));
      r = opaque_(e, args);
    } else {
      std::vector<Expr> args;
      for (const auto& a : e.args()) args.push_back(run(a));
      r = rebuild(e, std::move(args));
    }
    memo_.emplace(e.node(), r);
    return r;
  }

  std::function<Expr(const Expr&, const std::vector<Expr>&)> opaque_;

 private:
  Leaf leaf_;
  std::unordered_map<const Node*, Expr> memo_;
};

double domain_check(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(EvalError::Reason::Domain, std::string("domain error in ") + what);
  return v;
}

class Evaluator {
 public:
  explicit Evaluator(const Env& env) : env_(env) {}

  double value(const Expr& e) {
    switch (e.kind()) {
      case Kind::Number:
        return e.value().get_d();
      case Kind::Symbol: {
        auto it = env_.values.find(e.symbol().name);
        if (it != env_.values.end()) return it->second;
        if (e.symbol().cls == SymbolClass::Constant && e.symbol().name == "pi") return std::numbers::pi;
        throw EvalError(EvalError::Reason::Unbound, "unbound symbol: " + e.symbol().name);
      }
      default:
        break;
    }
    auto it = memo_.find(e.node());
    if (it != memo_.end()) return it->second;
    double r = compute(e);
    memo_.emplace(e.node(), r);
    return r;
  }

 private:
  double compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Add: {
        double s = 0;
        for (const auto& t : e.args()) s += value(t);
        return s;
      }
      case Kind::Mul: {
        double p = 1;
        for (const auto& t : e.args()) p *= value(t);
        return p;
      }
      case Kind::Pow: {
        double b = value(e.base());
        if (b == 0 && e.exponent() < 0) throw EvalError(EvalError::Reason::Domain, "division by zero");
        return domain_check(std::pow(b, e.exponent()), "power");
      }
      case Kind::Func: {
        double a = value(e.base());
        switch (e.fn()) {
          case Fn::Sin: return std::sin(a);
          case Fn::Cos: return std::cos(a);
          case Fn::Tan: return domain_check(std::tan(a), "tan");
          case Fn::Exp: return domain_check(std::exp(a), "exp");
          case Fn::Log:
            if (a <= 0) throw EvalError(EvalError::Reason::Domain, "log of non-positive value");
            return std::log(a);
          case Fn::Sqrt:
            if (a < 0) throw EvalError(EvalError::Reason::Domain, "sqrt of negative value");
            return std::sqrt(a);
        }
        return 0;
      }
      case Kind::Opaque: {
        auto it = env_.functions.find(e.name());
        if (it == env_.functions.end())
          throw EvalError(EvalError::Reason::Unbound, "unbound function: " + e.name());
        std::vector<double> args;
        for (const auto& a : e.args()) args.push_back(value(a));
        return domain_check(it->second(args, e.derivs()), e.name().c_str());
      }
      default:
        return 0;
    }
  }

  const Env& env_;
  std::unordered_map<const Node*, double> memo_;
};

double magnitude(const Expr& e, Evaluator& ev) {
  switch (e.kind()) {
    case Kind::Add: {
      double m = 0;
      for (const auto& t : e.args()) m = std::max(m, magnitude(t, ev));
      return m;
    }
    case Kind::Mul: {
      double p = 1;
      for (const auto& t : e.args()) p *= magnitude(t, ev);
      return p;
    }
    case Kind::Pow:
      if (e.exponent() > 0) return std::pow(magnitude(e.base(), ev), e.exponent());
      return std::pow(std::abs(ev.value(e.base())), e.exponent());
    default:
      return std::abs(ev.value(e));
  }
}

}  // namespace

Expr partial(const Expr& e, const Expr& symbol) {
  if (!symbol.is_symbol()) throw Error("unknown coordinate");
  Differentiator diff([&](const Expr& s) { return s == symbol ? Expr(1) : Expr(0); }, symbol.symbol_mask());
  return normalize(diff.d(e));
}

Expr derive(const Expr& e, const std::function<Expr(const Expr&)>& on_symbol) {
  Differentiator diff(on_symbol, ~std::uint64_t{0});
  return normalize(diff.d(e));
}

bool depends_on(const Expr& e, const Expr& symbol) {
  if ((e.symbol_mask() & symbol.symbol_mask()) == 0) return false;
  if (e.is_symbol()) return e == symbol;
  for (const auto& a : e.args())
    if (depends_on(a, symbol)) return true;
  return false;
}

std::vector<Expr> free_symbols(const Expr& e) {
  std::set<Expr, ExprLess> out;
  std::set<const Node*> seen;
  collect_symbols(e, out, seen);
  return {out.begin(), out.end()};
}

Expr substitute(const Expr& e, const Bindings& bindings, SubstituteMode mode) {
  if (mode == SubstituteMode::Closed) {
    for (const auto& s : free_symbols(e))
      if (s.symbol().cls == SymbolClass::Jet && !bindings.count(s.symbol().name))
        throw Error("unbound coordinate: " + s.symbol().name);
  }
  auto leaf = [&](const Expr& s) {
    auto it = bindings.find(s.symbol().name);
    return it == bindings.end() ? s : it->second;
  };
  Rewriter<decltype(leaf)> rw(leaf);
  return normalize(rw.run(e));
}

Expr substitute_function(const Expr& e, const std::string& name, const std::vector<Expr>& params,
                         const Expr& body) {
  for (const auto& p : params)
    if (!p.is_symbol()) throw Error("function parameters must be symbols");
  std::map<std::vector<int>, Expr> derived;
  auto leaf = [](const Expr& s) { return s; };
  Rewriter<decltype(leaf)> rw(leaf);
  rw.opaque_ = [&](const Expr& node, const std::vector<Expr>& args) -> Expr {
    if (node.name() != name) {
      return Expr::opaque(node.name(), args, std::vector<int>(node.derivs().begin(), node.derivs().end()));
    }
    if (args.size() != params.size()) throw Error("arity mismatch for " + name);
    std::vector<int> key(node.derivs().begin(), node.derivs().end());
    auto it = derived.find(key);
    if (it == derived.end()) {
      Expr b = body;
      for (std::size_t j = 0; j < key.size(); ++j)
        for (int k = 0; k < key[j]; ++k) b = partial(b, params[j]);
      it = derived.emplace(key, b).first;
    }
    Bindings bind;
    for (std::size_t j = 0; j < params.size(); ++j) bind[params[j].symbol().name] = args[j];
    return substitute(it->second, bind);
  };
  return normalize(rw.run(e));
}

double eval(const Expr& e, const Env& env) {
  Evaluator ev(env);
  return ev.value(e);
}

double term_scale(const Expr& e, const Env& env) {
  Evaluator ev(env);
  return magnitude(e, ev);
}

}  // namespace jetvar
