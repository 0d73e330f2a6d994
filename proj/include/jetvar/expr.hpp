#pragma once

// Immutable symbolic expressions over jet coordinates and transcendental atoms.
//
// An Expr is a shared, immutable tree. Construction never simplifies beyond
// trivial folding; call normalize() to obtain the canonical form (a rational
// function over atoms with exact coefficients).

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetvar {

using Rational = mpq_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by eval(). Domain errors are distinguished so samplers can retry.
class EvalError : public Error {
 public:
  enum class Reason { Unbound, Domain };
  EvalError(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

enum class SymbolClass : std::uint8_t { Constant, Parameter, Base, Jet };

/// Identity of a named symbol. Jet coordinates carry their field index and
/// multi-index so that the canonical order is graded on derivative order.
struct SymbolInfo {
  SymbolClass cls = SymbolClass::Parameter;
  std::string name;        // printed identifier, e.g. "y_tt"
  int index = 0;           // base index or fiber component index
  std::vector<int> alpha;  // multi-index (jets only)
  std::string stem;        // fiber component name (jets only), e.g. "y"
  std::string suffix;      // derivative suffix (jets only), e.g. "tt"

  int order() const;
  friend bool operator==(const SymbolInfo&, const SymbolInfo&) = default;
};

enum class Kind : std::uint8_t { Number, Symbol, Func, Opaque, Pow, Mul, Add };
enum class Fn : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt };

const char* fn_name(Fn fn);

struct Node;

class Expr {
 public:
  Expr();  // zero
  Expr(int value);
  Expr(const Rational& value);

  static Expr number(const Rational& value);
  static Expr symbol(SymbolInfo info);
  static Expr parameter(const std::string& name);
  static Expr pi();
  static Expr add(std::vector<Expr> terms);
  static Expr mul(std::vector<Expr> factors);
  static Expr pow(const Expr& base, int exponent);
  static Expr func(Fn fn, const Expr& arg);
  /// Opaque function `name(args...)` differentiated `derivs[j]` times in slot j.
  static Expr opaque(const std::string& name, std::vector<Expr> args, std::vector<int> derivs = {});

  Kind kind() const;
  bool is_number() const { return kind() == Kind::Number; }
  bool is_symbol() const { return kind() == Kind::Symbol; }
  bool is_zero() const;
  bool is_one() const;

  const Rational& value() const;
  const SymbolInfo& symbol() const;
  std::span<const Expr> args() const;
  const Expr& base() const;  // Pow base, Func argument
  int exponent() const;
  Fn fn() const;
  const std::string& name() const;  // Opaque name
  std::span<const int> derivs() const;

  std::size_t hash() const;
  std::uint64_t symbol_mask() const;
  const Node* node() const { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);

  /// Wraps a fully populated node; computes its hash and symbol mask.
  static Expr from_node(std::shared_ptr<Node> node);

 private:
  struct Raw {};
  Expr(Raw, std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  Kind kind = Kind::Number;
  std::size_t hash = 0;
  std::uint64_t mask = 0;
  Rational number;
  SymbolInfo sym;
  std::vector<Expr> args;
  int exponent = 0;
  Fn fn = Fn::Sin;
  std::string name;
  std::vector<int> derivs;
};

/// Total order on expressions. Symbols order by class, then index, then
/// derivative order and multi-index, so jet coordinates sort graded.
int compare(const Expr& a, const Expr& b);

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};
struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr tan(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sqrt(const Expr& e);

/// Canonical form: sums of products of atom powers with exact rational
/// coefficients, over a product of monic polynomial denominators.
/// Throws Error("zero denominator") when dividing by a symbolic zero.
Expr normalize(const Expr& e);

/// normalize(a - b) is zero.
bool equivalent(const Expr& a, const Expr& b);

/// Formal partial derivative with respect to a symbol; result normalized.
Expr partial(const Expr& e, const Expr& symbol);

/// Extends a derivation given on symbols to all expressions by the chain
/// rule. The result is normalized.
Expr derive(const Expr& e, const std::function<Expr(const Expr&)>& on_symbol);

bool depends_on(const Expr& e, const Expr& symbol);

/// Distinct symbols occurring in e (including inside function arguments).
std::vector<Expr> free_symbols(const Expr& e);

using Bindings = std::map<std::string, Expr>;

enum class SubstituteMode { Partial, Closed };

/// Simultaneous substitution of symbols by name, then normalize. In Closed
/// mode every jet coordinate of e must be bound.
Expr substitute(const Expr& e, const Bindings& bindings, SubstituteMode mode = SubstituteMode::Partial);

/// Replaces the opaque function `name` by `body`, a closed form in `params`.
/// Derivative atoms become the matching partials of body.
Expr substitute_function(const Expr& e, const std::string& name, const std::vector<Expr>& params,
                         const Expr& body);

/// Numeric rule for an opaque function: receives argument values and the
/// derivative counts per slot.
using OpaqueRule = std::function<double(std::span<const double>, std::span<const int>)>;

struct Env {
  std::map<std::string, double> values;
  std::map<std::string, OpaqueRule> functions;

  Env& set(const std::string& name, double v) {
    values[name] = v;
    return *this;
  }
};

double eval(const Expr& e, const Env& env);

/// Magnitude of the largest additive term of e at env (used to scale
/// zero tests).
double term_scale(const Expr& e, const Env& env);

}  // namespace jetvar
