#include "jetvar/expr.hpp"

#include <algorithm>
#include <functional>

namespace jetvar {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::uint64_t name_bit(const std::string& name) {
  return std::uint64_t{1} << (std::hash<std::string>{}(name) % 64);
}

std::shared_ptr<Node> make(Kind kind) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  return n;
}

int cmp_int(long a, long b) { return a < b ? -1 : (a > b ? 1 : 0); }

int compare_symbols(const SymbolInfo& a, const SymbolInfo& b) {
  if (int c = cmp_int(static_cast<int>(a.cls), static_cast<int>(b.cls))) return c;
  if (a.cls == SymbolClass::Base || a.cls == SymbolClass::Jet) {
    if (int c = cmp_int(a.index, b.index)) return c;
    if (int c = cmp_int(a.order(), b.order())) return c;
    if (a.alpha != b.alpha) return a.alpha < b.alpha ? -1 : 1;
  }
  int c = a.name.compare(b.name);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

int compare_lists(std::span<const Expr> a, std::span<const Expr> b) {
  if (int c = cmp_int(static_cast<long>(a.size()), static_cast<long>(b.size()))) return c;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (int c = compare(a[i], b[i])) return c;
  return 0;
}

}  // namespace

int SymbolInfo::order() const {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

const char* fn_name(Fn fn) {
  switch (fn) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Tan: return "tan";
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Sqrt: return "sqrt";
  }
  return "?";
}

Expr Expr::from_node(std::shared_ptr<Node> n) {
  std::size_t h = static_cast<std::size_t>(n->kind) * 0x51ed27;
  std::uint64_t mask = 0;
  switch (n->kind) {
    case Kind::Number:
      h = mix(h, std::hash<std::string>{}(n->number.get_str()));
      break;
    case Kind::Symbol:
      h = mix(h, std::hash<std::string>{}(n->sym.name));
      h = mix(h, static_cast<std::size_t>(n->sym.cls));
      mask = name_bit(n->sym.name);
      break;
    case Kind::Func:
      h = mix(h, static_cast<std::size_t>(n->fn));
      break;
    case Kind::Opaque:
      h = mix(h, std::hash<std::string>{}(n->name));
      for (int d : n->derivs) h = mix(h, static_cast<std::size_t>(d));
      break;
    case Kind::Pow:
      h = mix(h, static_cast<std::size_t>(n->exponent + 1000));
      break;
    default:
      break;
  }
  for (const auto& a : n->args) {
    h = mix(h, a.hash());
    mask |= a.symbol_mask();
  }
  n->hash = h;
  n->mask = mask;
  return Expr(Raw{}, std::move(n));
}

Expr::Expr() : Expr(Rational(0)) {}

Expr::Expr(int value) : Expr(Rational(value)) {}

Expr::Expr(const Rational& value) {
  auto n = make(Kind::Number);
  n->number = value;
  n->number.canonicalize();
  node_ = from_node(std::move(n)).node_;
}

Expr Expr::number(const Rational& value) { return Expr(value); }

Expr Expr::symbol(SymbolInfo info) {
  auto n = make(Kind::Symbol);
  n->sym = std::move(info);
  return from_node(std::move(n));
}

Expr Expr::parameter(const std::string& name) {
  SymbolInfo s;
  s.cls = SymbolClass::Parameter;
  s.name = name;
  return symbol(std::move(s));
}

Expr Expr::pi() {
  SymbolInfo s;
  s.cls = SymbolClass::Constant;
  s.name = "pi";
  return symbol(std::move(s));
}

Expr Expr::add(std::vector<Expr> terms) {
  std::erase_if(terms, [](const Expr& t) { return t.is_zero(); });
  if (terms.empty()) return Expr(0);
  if (terms.size() == 1) return terms.front();
  auto n = make(Kind::Add);
  n->args = std::move(terms);
  return from_node(std::move(n));
}

Expr Expr::mul(std::vector<Expr> factors) {
  for (const auto& f : factors)
    if (f.is_zero()) return Expr(0);
  std::erase_if(factors, [](const Expr& f) { return f.is_one(); });
  if (factors.empty()) return Expr(1);
  if (factors.size() == 1) return factors.front();
  auto n = make(Kind::Mul);
  n->args = std::move(factors);
  return from_node(std::move(n));
}

Expr Expr::pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr(1);
  if (exponent == 1) return base;
  if (base.is_one()) return base;
  auto n = make(Kind::Pow);
  n->args = {base};
  n->exponent = exponent;
  return from_node(std::move(n));
}

Expr Expr::func(Fn fn, const Expr& arg) {
  auto n = make(Kind::Func);
  n->fn = fn;
  n->args = {arg};
  return from_node(std::move(n));
}

Expr Expr::opaque(const std::string& name, std::vector<Expr> args, std::vector<int> derivs) {
  if (derivs.empty()) derivs.assign(args.size(), 0);
  if (derivs.size() != args.size()) throw Error("opaque derivative arity mismatch for " + name);
  auto n = make(Kind::Opaque);
  n->name = name;
  n->args = std::move(args);
  n->derivs = std::move(derivs);
  return from_node(std::move(n));
}

Kind Expr::kind() const { return node_->kind; }
bool Expr::is_zero() const { return node_->kind == Kind::Number && sgn(node_->number) == 0; }
bool Expr::is_one() const { return node_->kind == Kind::Number && node_->number == 1; }
const Rational& Expr::value() const { return node_->number; }
const SymbolInfo& Expr::symbol() const { return node_->sym; }
std::span<const Expr> Expr::args() const { return node_->args; }
const Expr& Expr::base() const { return node_->args.front(); }
int Expr::exponent() const { return node_->exponent; }
Fn Expr::fn() const { return node_->fn; }
const std::string& Expr::name() const { return node_->name; }
std::span<const int> Expr::derivs() const { return node_->derivs; }
std::size_t Expr::hash() const { return node_->hash; }
std::uint64_t Expr::symbol_mask() const { return node_->mask; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  if (int c = cmp_int(static_cast<int>(a.kind()), static_cast<int>(b.kind()))) return c;
  switch (a.kind()) {
    case Kind::Number:
      return cmp(a.value(), b.value()) < 0 ? -1 : (a.value() == b.value() ? 0 : 1);
    case Kind::Symbol:
      return compare_symbols(a.symbol(), b.symbol());
    case Kind::Func:
      if (int c = cmp_int(static_cast<int>(a.fn()), static_cast<int>(b.fn()))) return c;
      return compare(a.base(), b.base());
    case Kind::Opaque: {
      int c = a.name().compare(b.name());
      if (c != 0) return c < 0 ? -1 : 1;
      if (int c2 = compare_lists(a.args(), b.args())) return c2;
      auto da = a.derivs(), db = b.derivs();
      return std::lexicographical_compare_three_way(da.begin(), da.end(), db.begin(), db.end()) < 0
                 ? -1
                 : (std::equal(da.begin(), da.end(), db.begin(), db.end()) ? 0 : 1);
    }
    case Kind::Pow:
      if (int c = compare(a.base(), b.base())) return c;
      return cmp_int(a.exponent(), b.exponent());
    case Kind::Mul:
    case Kind::Add:
      return compare_lists(a.args(), b.args());
  }
  return 0;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::add({a, -b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::mul({a, Expr::pow(b, -1)}); }
Expr operator-(const Expr& a) {
  if (a.is_number()) return Expr(Rational(-a.value()));
  return Expr::mul({Expr(-1), a});
}
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

Expr pow(const Expr& base, int exponent) { return Expr::pow(base, exponent); }
Expr sin(const Expr& e) { return Expr::func(Fn::Sin, e); }
Expr cos(const Expr& e) { return Expr::func(Fn::Cos, e); }
Expr tan(const Expr& e) { return Expr::func(Fn::Tan, e); }
Expr exp(const Expr& e) { return Expr::func(Fn::Exp, e); }
Expr log(const Expr& e) { return Expr::func(Fn::Log, e); }
Expr sqrt(const Expr& e) { return Expr::func(Fn::Sqrt, e); }

bool equivalent(const Expr& a, const Expr& b) { return normalize(a - b).is_zero(); }

}  // namespace jetvar
