// Canonicalization of expressions into rational functions over atoms.
//
// Atoms are symbols, applied transcendental functions and opaque function
// atoms. Within one normalize() call atoms get local integer ids; the final
// step re-ranks them by the global expression order so that the emitted
// tree is independent of traversal order.

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_map>

#include "jetvar/expr.hpp"

namespace jetvar {

namespace {

using Mono = std::vector<std::pair<int, int>>;  // (atom id, exponent), ids ascending

struct MonoHash {
  std::size_t operator()(const Mono& m) const {
    std::size_t h = 1469598103934665603ULL;
    for (auto [id, e] : m) {
      h = (h ^ static_cast<std::size_t>(id)) * 1099511628211ULL;
      h = (h ^ static_cast<std::size_t>(e + 7919)) * 1099511628211ULL;
    }
    return h;
  }
};

Mono mono_mul(const Mono& a, const Mono& b) {
  Mono r;
  r.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      r.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      r.push_back(b[j++]);
    } else {
      int e = a[i].second + b[j].second;
      if (e != 0) r.emplace_back(a[i].first, e);
      ++i;
      ++j;
    }
  }
  return r;
}

Mono mono_scale(const Mono& a, int k) {
  Mono r;
  if (k == 0) return r;
  r.reserve(a.size());
  for (auto [id, e] : a) r.emplace_back(id, e * k);
  return r;
}

int mono_degree(const Mono& m) {
  int d = 0;
  for (auto [id, e] : m) d += e;
  return d;
}

// Lexicographic monomial order on dense exponent vectors, atom 0 most
// significant. Used only for division and for choosing leading terms.
int lex_cmp(const Mono& a, const Mono& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) return a[i].second > 0 ? 1 : -1;
    if (i == a.size() || b[j].first < a[i].first) return b[j].second > 0 ? -1 : 1;
    if (a[i].second != b[j].second) return a[i].second > b[j].second ? 1 : -1;
    ++i;
    ++j;
  }
  return 0;
}

struct Term {
  Mono m;
  Rational c;
};

struct Poly {
  std::vector<Term> t;  // sorted by m, no zero coefficients

  bool zero() const { return t.empty(); }
  bool constant() const { return t.empty() || (t.size() == 1 && t[0].m.empty()); }
};

bool operator==(const Poly& a, const Poly& b) {
  if (a.t.size() != b.t.size()) return false;
  for (std::size_t i = 0; i < a.t.size(); ++i)
    if (a.t[i].m != b.t[i].m || a.t[i].c != b.t[i].c) return false;
  return true;
}

bool poly_less(const Poly& a, const Poly& b) {
  std::size_t n = std::min(a.t.size(), b.t.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.t[i].m != b.t[i].m) return a.t[i].m < b.t[i].m;
    if (a.t[i].c != b.t[i].c) return a.t[i].c < b.t[i].c;
  }
  return a.t.size() < b.t.size();
}

Poly poly_const(const Rational& c) {
  Poly p;
  if (sgn(c) != 0) p.t.push_back({{}, c});
  return p;
}

Poly poly_atom(int id) {
  Poly p;
  p.t.push_back({{{id, 1}}, Rational(1)});
  return p;
}

void sort_combine(std::vector<Term>& terms) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.m < b.m; });
  std::vector<Term> out;
  out.reserve(terms.size());
  for (auto& term : terms) {
    if (!out.empty() && out.back().m == term.m) {
      out.back().c += term.c;
    } else {
      if (!out.empty() && sgn(out.back().c) == 0) out.pop_back();
      out.push_back(std::move(term));
    }
  }
  if (!out.empty() && sgn(out.back().c) == 0) out.pop_back();
  terms = std::move(out);
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly r;
  r.t.reserve(a.t.size() + b.t.size());
  std::size_t i = 0, j = 0;
  while (i < a.t.size() || j < b.t.size()) {
    if (j == b.t.size() || (i < a.t.size() && a.t[i].m < b.t[j].m)) {
      r.t.push_back(a.t[i++]);
    } else if (i == a.t.size() || b.t[j].m < a.t[i].m) {
      r.t.push_back(b.t[j++]);
    } else {
      Rational c = a.t[i].c + b.t[j].c;
      if (sgn(c) != 0) r.t.push_back({a.t[i].m, c});
      ++i;
      ++j;
    }
  }
  return r;
}

Poly poly_sum(std::vector<Poly>& parts) {
  std::vector<Term> all;
  for (auto& p : parts)
    for (auto& term : p.t) all.push_back(std::move(term));
  sort_combine(all);
  return Poly{std::move(all)};
}

Poly poly_scale(const Poly& a, const Rational& c) {
  if (sgn(c) == 0) return {};
  Poly r = a;
  for (auto& term : r.t) term.c *= c;
  return r;
}

// Multiplying by a monomial can reorder terms, so re-sort.
Poly poly_mul_mono(const Poly& a, const Mono& m, const Rational& c) {
  if (sgn(c) == 0) return {};
  Poly r;
  r.t.reserve(a.t.size());
  for (const auto& term : a.t) r.t.push_back({mono_mul(term.m, m), term.c * c});
  std::sort(r.t.begin(), r.t.end(), [](const Term& x, const Term& y) { return x.m < y.m; });
  return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.zero() || b.zero()) return {};
  if (a.t.size() == 1) return poly_mul_mono(b, a.t[0].m, a.t[0].c);
  if (b.t.size() == 1) return poly_mul_mono(a, b.t[0].m, b.t[0].c);
  std::unordered_map<Mono, Rational, MonoHash> acc;
  acc.reserve(a.t.size() * b.t.size());
  for (const auto& x : a.t)
    for (const auto& y : b.t) acc[mono_mul(x.m, y.m)] += x.c * y.c;
  Poly r;
  r.t.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (sgn(c) != 0) r.t.push_back({m, c});
  std::sort(r.t.begin(), r.t.end(), [](const Term& x, const Term& y) { return x.m < y.m; });
  return r;
}

Poly poly_pow(Poly base, int k) {
  Poly result = poly_const(1);
  while (k > 0) {
    if (k & 1) result = poly_mul(result, base);
    k >>= 1;
    if (k) base = poly_mul(base, base);
  }
  return result;
}

// Greatest common monomial divisor, allowing negative exponents.
Mono poly_content(const Poly& p) {
  if (p.t.empty()) return {};
  std::map<int, int> mins;
  for (auto [id, e] : p.t[0].m) mins[id] = e;
  for (std::size_t i = 1; i < p.t.size(); ++i) {
    std::map<int, int> present;
    for (auto [id, e] : p.t[i].m) present[id] = e;
    for (auto& [id, e] : mins) {
      auto it = present.find(id);
      e = std::min(e, it == present.end() ? 0 : it->second);
    }
    for (auto [id, e] : present)
      if (!mins.count(id)) mins[id] = std::min(e, 0);
  }
  Mono m;
  for (auto [id, e] : mins)
    if (e != 0) m.emplace_back(id, e);
  return m;
}

// Monomial making every exponent non-negative when multiplied in.
Mono nonneg_shift(const Poly& p) {
  std::map<int, int> need;
  for (const auto& term : p.t)
    for (auto [id, e] : term.m)
      if (e < 0) need[id] = std::max(need[id], -e);
  Mono m;
  for (auto [id, e] : need) m.emplace_back(id, e);
  return m;
}

const Term& lex_leading(const Poly& p) {
  const Term* best = &p.t.front();
  for (const auto& term : p.t)
    if (lex_cmp(term.m, best->m) > 0) best = &term;
  return *best;
}

bool mono_divides(const Mono& d, const Mono& m) {
  std::size_t j = 0;
  for (auto [id, e] : d) {
    while (j < m.size() && m[j].first < id) ++j;
    if (j == m.size() || m[j].first != id || m[j].second < e) return false;
  }
  return true;
}

struct LexGreater {
  bool operator()(const Mono& a, const Mono& b) const { return lex_cmp(a, b) > 0; }
};

// Exact division of polynomials with non-negative exponents. Returns nullopt
// as soon as a term lands in the remainder.
std::optional<Poly> divide_exact(const Poly& p, const Poly& d) {
  const Term& lead = lex_leading(d);
  std::map<Mono, Rational, LexGreater> rem;
  for (const auto& term : p.t) rem.emplace(term.m, term.c);
  std::vector<Term> q;
  std::size_t guard = 0;
  while (!rem.empty()) {
    if (++guard > 200000) return std::nullopt;
    auto it = rem.begin();
    if (!mono_divides(lead.m, it->first)) return std::nullopt;
    Mono qm = mono_mul(it->first, mono_scale(lead.m, -1));
    Rational qc = it->second / lead.c;
    for (const auto& term : d.t) {
      Mono m = mono_mul(term.m, qm);
      auto [pos, inserted] = rem.try_emplace(m, 0);
      pos->second -= qc * term.c;
      if (sgn(pos->second) == 0) rem.erase(pos);
    }
    q.push_back({std::move(qm), std::move(qc)});
  }
  sort_combine(q);
  return Poly{std::move(q)};
}

struct Den {
  Poly p;  // at least two terms, non-negative exponents, trivial content, lex-monic
  int e = 0;
};

struct RatFun {
  Poly num;
  std::vector<Den> dens;  // sorted by poly_less

  bool zero() const { return num.zero(); }
};

void sort_dens(std::vector<Den>& dens) {
  std::sort(dens.begin(), dens.end(), [](const Den& a, const Den& b) { return poly_less(a.p, b.p); });
}

RatFun rat_poly(Poly p) { return RatFun{std::move(p), {}}; }

Poly expand_dens(const std::vector<Den>& dens) {
  Poly r = poly_const(1);
  for (const auto& d : dens) r = poly_mul(r, poly_pow(d.p, d.e));
  return r;
}

void cancel(RatFun& r) {
  if (r.num.zero()) {
    r.dens.clear();
    return;
  }
  for (auto& d : r.dens) {
    while (d.e > 0) {
      Mono shift = nonneg_shift(r.num);
      Poly shifted = shift.empty() ? r.num : poly_mul_mono(r.num, shift, 1);
      auto q = divide_exact(shifted, d.p);
      if (!q) break;
      r.num = shift.empty() ? std::move(*q) : poly_mul_mono(*q, mono_scale(shift, -1), 1);
      --d.e;
    }
  }
  std::erase_if(r.dens, [](const Den& d) { return d.e == 0; });
}

std::vector<Den> merge_dens(const std::vector<Den>& a, const std::vector<Den>& b, bool sum) {
  std::vector<Den> out = a;
  for (const auto& d : b) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Den& x) { return x.p == d.p; });
    if (it == out.end()) {
      out.push_back(d);
    } else {
      it->e = sum ? it->e + d.e : std::max(it->e, d.e);
    }
  }
  sort_dens(out);
  return out;
}

int den_exponent(const std::vector<Den>& dens, const Poly& p) {
  for (const auto& d : dens)
    if (d.p == p) return d.e;
  return 0;
}

RatFun rat_add(const RatFun& a, const RatFun& b) {
  if (a.zero()) return b;
  if (b.zero()) return a;
  if (a.dens.empty() && b.dens.empty()) return rat_poly(poly_add(a.num, b.num));
  std::vector<Den> dens = merge_dens(a.dens, b.dens, false);
  Poly na = a.num, nb = b.num;
  for (const auto& d : dens) {
    int ea = den_exponent(a.dens, d.p), eb = den_exponent(b.dens, d.p);
    if (d.e > ea) na = poly_mul(na, poly_pow(d.p, d.e - ea));
    if (d.e > eb) nb = poly_mul(nb, poly_pow(d.p, d.e - eb));
  }
  RatFun r{poly_add(na, nb), std::move(dens)};
  cancel(r);
  return r;
}

RatFun rat_mul(const RatFun& a, const RatFun& b) {
  RatFun r{poly_mul(a.num, b.num), {}};
  if (r.num.zero()) return r;
  if (a.dens.empty() && b.dens.empty()) return r;
  r.dens = merge_dens(a.dens, b.dens, true);
  cancel(r);
  return r;
}

RatFun rat_invert(const RatFun& a) {
  if (a.num.zero()) throw Error("zero denominator");
  Mono content = poly_content(a.num);
  Poly rest = content.empty() ? a.num : poly_mul_mono(a.num, mono_scale(content, -1), 1);
  Rational lc = lex_leading(rest).c;
  rest = poly_scale(rest, Rational(1) / lc);
  RatFun r;
  r.num = poly_mul_mono(expand_dens(a.dens), mono_scale(content, -1), Rational(1) / lc);
  if (!rest.constant()) r.dens.push_back({std::move(rest), 1});
  cancel(r);
  return r;
}

RatFun rat_pow(const RatFun& a, int k) {
  if (k == 0) return rat_poly(poly_const(1));
  RatFun base = k < 0 ? rat_invert(a) : a;
  int n = k < 0 ? -k : k;
  if (base.dens.empty() && base.num.t.size() == 1) {
    const Term& term = base.num.t[0];
    Rational c;
    mpz_pow_ui(c.get_num_mpz_t(), term.c.get_num_mpz_t(), static_cast<unsigned long>(n));
    mpz_pow_ui(c.get_den_mpz_t(), term.c.get_den_mpz_t(), static_cast<unsigned long>(n));
    c.canonicalize();
    return rat_poly(Poly{{{mono_scale(term.m, n), c}}});
  }
  RatFun r{poly_pow(base.num, n), base.dens};
  for (auto& d : r.dens) d.e *= n;
  cancel(r);
  return r;
}

std::optional<Rational> pi_multiple(const Expr& arg) {
  if (arg.is_symbol() && arg.symbol().cls == SymbolClass::Constant && arg.symbol().name == "pi") return Rational(1);
  if (arg.kind() == Kind::Mul && arg.args().size() == 2 && arg.args()[0].is_number()) {
    const Expr& s = arg.args()[1];
    if (s.is_symbol() && s.symbol().cls == SymbolClass::Constant && s.symbol().name == "pi")
      return arg.args()[0].value();
  }
  return std::nullopt;
}

// Exact values at 0, 1 and integer or half-integer multiples of pi.
std::optional<Rational> special_value(Fn fn, const Expr& arg) {
  if (arg.is_number()) {
    const Rational& v = arg.value();
    if (sgn(v) == 0) {
      switch (fn) {
        case Fn::Sin: case Fn::Tan: case Fn::Sqrt: return Rational(0);
        case Fn::Cos: case Fn::Exp: return Rational(1);
        case Fn::Log: return std::nullopt;
      }
    }
    if (v == 1 && (fn == Fn::Log)) return Rational(0);
    if (v == 1 && (fn == Fn::Sqrt)) return Rational(1);
    return std::nullopt;
  }
  auto c = pi_multiple(arg);
  if (!c) return std::nullopt;
  Rational twice = *c * 2;
  if (twice.get_den() != 1) return std::nullopt;
  mpz_class k = twice.get_num();  // arg = k*pi/2
  mpz_class r = k % 4;
  if (r < 0) r += 4;
  long rr = r.get_si();
  switch (fn) {
    case Fn::Sin: return Rational(rr == 1 ? 1 : (rr == 3 ? -1 : 0));
    case Fn::Cos: return Rational(rr == 0 ? 1 : (rr == 2 ? -1 : 0));
    case Fn::Tan:
      if (rr % 2 == 0) return Rational(0);
      return std::nullopt;
    default: return std::nullopt;
  }
}

class Normalizer {
 public:
  RatFun convert(const Expr& e) {
    switch (e.kind()) {
      case Kind::Number:
        return rat_poly(poly_const(e.value()));
      case Kind::Symbol:
        return rat_poly(poly_atom(intern(e)));
      case Kind::Func: {
        Expr arg = normalize(e.base());
        if (auto v = special_value(e.fn(), arg)) return rat_poly(poly_const(*v));
        return rat_poly(poly_atom(intern(Expr::func(e.fn(), arg))));
      }
      case Kind::Opaque: {
        std::vector<Expr> args;
        args.reserve(e.args().size());
        for (const auto& a : e.args()) args.push_back(normalize(a));
        std::vector<int> derivs(e.derivs().begin(), e.derivs().end());
        return rat_poly(poly_atom(intern(Expr::opaque(e.name(), std::move(args), std::move(derivs)))));
      }
      default:
        break;
    }
    auto found = memo_.find(e.node());
    if (found != memo_.end()) return found->second;
    RatFun r;
    if (e.kind() == Kind::Pow) {
      r = rat_pow(convert(e.base()), e.exponent());
    } else if (e.kind() == Kind::Mul) {
      r = rat_poly(poly_const(1));
      for (const auto& f : e.args()) {
        r = rat_mul(r, convert(f));
        if (r.zero()) break;
      }
    } else {
      std::vector<Poly> plain;
      RatFun rest;
      for (const auto& t : e.args()) {
        RatFun part = convert(t);
        if (part.dens.empty()) {
          plain.push_back(std::move(part.num));
        } else {
          rest = rat_add(rest, part);
        }
      }
      r = rat_add(rat_poly(poly_sum(plain)), rest);
    }
    memo_.emplace(e.node(), r);
    return r;
  }

  Expr emit(RatFun r) {
    // Rank atoms by the global order so the output is traversal independent.
    std::vector<int> order(atoms_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return compare(atoms_[a], atoms_[b]) < 0; });
    std::vector<int> rank(atoms_.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);

    auto remap = [&](const Poly& p) {
      Poly out;
      out.t.reserve(p.t.size());
      for (const auto& term : p.t) {
        Mono m;
        for (auto [id, e] : term.m) m.emplace_back(rank[id], e);
        std::sort(m.begin(), m.end());
        out.t.push_back({std::move(m), term.c});
      }
      std::sort(out.t.begin(), out.t.end(), [](const Term& a, const Term& b) { return a.m < b.m; });
      return out;
    };
    r.num = remap(r.num);
    for (auto& d : r.dens) {
      d.p = remap(d.p);
      Rational lc = lex_leading(d.p).c;
      if (lc != 1) {
        d.p = poly_scale(d.p, Rational(1) / lc);
        Rational f = 1;
        for (int i = 0; i < d.e; ++i) f /= lc;
        r.num = poly_scale(r.num, f);
      }
    }
    sort_dens(r.dens);

    std::vector<Expr> ranked(atoms_.size());
    for (std::size_t i = 0; i < order.size(); ++i) ranked[i] = atoms_[order[i]];

    if (r.num.zero()) return Expr(0);
    if (r.dens.empty()) return poly_expr(r.num, ranked);
    std::vector<Expr> factors;
    if (r.num.t.size() == 1) {
      Expr t = term_expr(r.num.t[0], ranked);
      if (t.kind() == Kind::Mul) {
        for (const auto& f : t.args()) factors.push_back(f);
      } else {
        factors.push_back(t);
      }
    } else {
      factors.push_back(poly_expr(r.num, ranked));
    }
    for (const auto& d : r.dens) factors.push_back(Expr::pow(poly_expr(d.p, ranked), -d.e));
    return Expr::mul(std::move(factors));
  }

 private:
  int intern(const Expr& atom) {
    auto range = index_.equal_range(atom.hash());
    for (auto it = range.first; it != range.second; ++it)
      if (atoms_[it->second] == atom) return it->second;
    int id = static_cast<int>(atoms_.size());
    atoms_.push_back(atom);
    index_.emplace(atom.hash(), id);
    return id;
  }

  static Expr term_expr(const Term& term, const std::vector<Expr>& ranked) {
    std::vector<Expr> factors;
    if (term.c != 1 || term.m.empty()) factors.push_back(Expr(term.c));
    for (auto [id, e] : term.m) factors.push_back(Expr::pow(ranked[id], e));
    return Expr::mul(std::move(factors));
  }

  // Terms in descending graded order; within a degree the largest atom
  // decides.
  static bool print_before(const Mono& a, const Mono& b) {
    int da = mono_degree(a), db = mono_degree(b);
    if (da != db) return da > db;
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(a.size()) - 1;
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(b.size()) - 1;
    while (i >= 0 || j >= 0) {
      if (j < 0 || (i >= 0 && a[i].first > b[j].first)) return a[i].second > 0;
      if (i < 0 || b[j].first > a[i].first) return b[j].second < 0;
      if (a[i].second != b[j].second) return a[i].second > b[j].second;
      --i;
      --j;
    }
    return false;
  }

  static Expr poly_expr(const Poly& p, const std::vector<Expr>& ranked) {
    if (p.t.empty()) return Expr(0);
    std::vector<const Term*> terms;
    for (const auto& term : p.t) terms.push_back(&term);
    std::sort(terms.begin(), terms.end(), [](const Term* a, const Term* b) { return print_before(a->m, b->m); });
    if (terms.size() == 1) return term_expr(*terms[0], ranked);
    std::vector<Expr> out;
    out.reserve(terms.size());
    for (const Term* t : terms) out.push_back(term_expr(*t, ranked));
    return Expr::add(std::move(out));
  }

  std::vector<Expr> atoms_;
  std::unordered_multimap<std::size_t, int> index_;
  std::unordered_map<const Node*, RatFun> memo_;
};

}  // namespace

Expr normalize(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Symbol:
      return e;
    default:
      break;
  }
  Normalizer n;
  RatFun r = n.convert(e);
  return n.emit(std::move(r));
}

}  // namespace jetvar
