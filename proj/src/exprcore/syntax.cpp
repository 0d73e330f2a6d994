#include "jetvar/syntax.hpp"

#include <cctype>
#include <sstream>

namespace jetvar {

// ---------------------------------------------------------------- printing

namespace {

bool is_negative(const Expr& e) {
  if (e.is_number()) return sgn(e.value()) < 0;
  if (e.kind() == Kind::Mul) return e.args()[0].is_number() && sgn(e.args()[0].value()) < 0;
  if (e.kind() == Kind::Add) return is_negative(e.args()[0]);
  return false;
}

Expr negate(const Expr& e) {
  if (e.is_number()) return Expr(Rational(-e.value()));
  if (e.kind() == Kind::Mul && e.args()[0].is_number()) {
    std::vector<Expr> f(e.args().begin(), e.args().end());
    f[0] = Expr(Rational(-f[0].value()));
    return Expr::mul(std::move(f));
  }
  if (e.kind() == Kind::Add) {
    std::vector<Expr> t;
    for (const auto& a : e.args()) t.push_back(negate(a));
    return Expr::add(std::move(t));
  }
  return Expr::mul({Expr(-1), e});
}

bool is_atomic(const Expr& e) {
  switch (e.kind()) {
    case Kind::Symbol:
    case Kind::Func:
    case Kind::Opaque:
      return true;
    case Kind::Number:
      return e.value().get_den() == 1 && sgn(e.value()) >= 0;
    default:
      return false;
  }
}

// Operands that can follow a unary minus without parentheses.
bool binds_tighter_than_minus(const Expr& e) {
  return is_atomic(e) || (e.kind() == Kind::Pow && e.exponent() > 0 && is_atomic(e.base()));
}

class PlainPrinter {
 public:
  std::string print(const Expr& e) {
    if (is_negative(e) && !e.is_number()) {
      Expr n = negate(e);
      return binds_tighter_than_minus(n) ? "-" + print(n) : "-(" + print(n) + ")";
    }
    switch (e.kind()) {
      case Kind::Number:
        return e.value().get_str();
      case Kind::Symbol:
        return e.symbol().name;
      case Kind::Func:
        return std::string(fn_name(e.fn())) + "(" + print(e.base()) + ")";
      case Kind::Opaque:
        return opaque(e);
      case Kind::Pow:
        return power(e);
      case Kind::Mul:
        return product(e);
      case Kind::Add:
        return sum(e);
    }
    return "?";
  }

 private:
  std::string opaque(const Expr& e) {
    std::string call = e.name() + "(";
    for (std::size_t i = 0; i < e.args().size(); ++i) call += (i ? "," : "") + print(e.args()[i]);
    call += ")";
    bool differentiated = false;
    for (int d : e.derivs()) differentiated |= d != 0;
    if (!differentiated) return call;
    std::string out = "deriv(" + call;
    for (int d : e.derivs()) out += "," + std::to_string(d);
    return out + ")";
  }

  std::string power(const Expr& e) {
    std::string base = print(e.base());
    if (!is_atomic(e.base())) base = "(" + base + ")";
    int k = e.exponent();
    return base + (k < 0 ? "^(" + std::to_string(k) + ")" : "^" + std::to_string(k));
  }

  std::string factor(const Expr& f, bool first) {
    if (f.is_number()) {
      if (first && sgn(f.value()) > 0) return f.value().get_str();
      return "(" + f.value().get_str() + ")";
    }
    if (f.kind() == Kind::Add || f.kind() == Kind::Mul || is_negative(f)) return "(" + print(f) + ")";
    return print(f);
  }

  std::string product(const Expr& e) {
    std::string out;
    for (std::size_t i = 0; i < e.args().size(); ++i) {
      if (i) out += "*";
      out += factor(e.args()[i], i == 0);
    }
    return out;
  }

  std::string sum(const Expr& e) {
    std::string out = print(e.args()[0]);
    for (std::size_t i = 1; i < e.args().size(); ++i) {
      const Expr& t = e.args()[i];
      if (is_negative(t)) {
        Expr n = negate(t);
        out += " - " + (n.kind() == Kind::Add ? "(" + print(n) + ")" : print(n));
      } else {
        out += " + " + (t.kind() == Kind::Add ? "(" + print(t) + ")" : print(t));
      }
    }
    return out;
  }
};

const char* greek(const std::string& s) {
  static const char* names[] = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
                                "iota", "kappa", "lambda", "mu", "nu", "xi", "rho", "sigma",
                                "tau", "phi", "chi", "psi", "omega", "Gamma", "Delta", "Theta",
                                "Lambda", "Phi", "Psi", "Omega"};
  for (const char* n : names)
    if (s == n) return n;
  if (s == "th") return "theta";
  if (s == "ph") return "phi";
  return nullptr;
}

std::string latex_name(const std::string& stem) {
  std::size_t cut = stem.size();
  while (cut > 0 && std::isdigit(static_cast<unsigned char>(stem[cut - 1]))) --cut;
  std::string letters = stem.substr(0, cut), digits = stem.substr(cut);
  if (cut == 0) {
    letters = stem;
    digits.clear();
  }
  std::string head = greek(letters) ? std::string("\\") + greek(letters) : letters;
  return digits.empty() ? head : head + "^{" + digits + "}";
}

class LatexPrinter {
 public:
  std::string print(const Expr& e) {
    if (is_negative(e) && !e.is_number()) {
      Expr n = negate(e);
      return is_atomic(n) ? "-" + print(n) : "-\\left(" + print(n) + "\\right)";
    }
    switch (e.kind()) {
      case Kind::Number: {
        const Rational& v = e.value();
        if (v.get_den() == 1) return v.get_num().get_str();
        std::string sign = sgn(v) < 0 ? "-" : "";
        mpz_class num = abs(v.get_num());
        return sign + "\\frac{" + num.get_str() + "}{" + v.get_den().get_str() + "}";
      }
      case Kind::Symbol:
        return symbol(e.symbol());
      case Kind::Func:
        if (e.fn() == Fn::Sqrt) return "\\sqrt{" + print(e.base()) + "}";
        return std::string("\\") + fn_name(e.fn()) + "\\left(" + print(e.base()) + "\\right)";
      case Kind::Opaque:
        return opaque(e);
      case Kind::Pow:
        if (e.exponent() < 0) return "\\frac{1}{" + power_body(e.base(), -e.exponent()) + "}";
        return power_body(e.base(), e.exponent());
      case Kind::Mul:
        return product(e);
      case Kind::Add: {
        std::string out = print(e.args()[0]);
        for (std::size_t i = 1; i < e.args().size(); ++i) {
          const Expr& t = e.args()[i];
          if (is_negative(t)) {
            out += " - " + print(negate(t));
          } else {
            out += " + " + print(t);
          }
        }
        return out;
      }
    }
    return "?";
  }

 private:
  static std::string symbol(const SymbolInfo& s) {
    if (s.cls == SymbolClass::Constant && s.name == "pi") return "\\pi";
    if (s.cls != SymbolClass::Jet) {
      auto us = s.name.find('_');
      if (us == std::string::npos) return latex_name(s.name);
      return latex_name(s.name.substr(0, us)) + "_{" + s.name.substr(us + 1) + "}";
    }
    int order = s.order();
    std::string stem = latex_name(s.stem);
    if (order == 0) return stem;
    if (s.alpha.size() == 1 && order <= 2) {
      // Put the dot on the letter, keep an index superscript outside.
      auto caret = stem.find("^{");
      std::string head = caret == std::string::npos ? stem : stem.substr(0, caret);
      std::string tail = caret == std::string::npos ? "" : stem.substr(caret);
      return std::string(order == 1 ? "\\dot{" : "\\ddot{") + head + "}" + tail;
    }
    return stem + "_{" + s.suffix + "}";
  }

  std::string opaque(const Expr& e) {
    std::string args;
    for (std::size_t i = 0; i < e.args().size(); ++i) args += (i ? ", " : "") + print(e.args()[i]);
    std::string head = latex_name(e.name());
    auto us = e.name().find('_');
    if (us != std::string::npos)
      head = latex_name(e.name().substr(0, us)) + "_{" + e.name().substr(us + 1) + "}";
    std::string ops;
    for (std::size_t j = 0; j < e.derivs().size(); ++j) {
      int d = e.derivs()[j];
      if (d == 0) continue;
      ops += "\\partial_{" + std::to_string(j + 1) + "}";
      if (d > 1) ops += "^{" + std::to_string(d) + "}";
      ops += " ";
    }
    return ops + head + "\\left(" + args + "\\right)";
  }

  std::string power_body(const Expr& base, int k) {
    std::string b = print(base);
    if (!is_atomic(base)) b = "\\left(" + b + "\\right)";
    return k == 1 ? b : b + "^{" + std::to_string(k) + "}";
  }

  std::string product(const Expr& e) {
    std::vector<std::string> num, den;
    for (std::size_t i = 0; i < e.args().size(); ++i) {
      const Expr& f = e.args()[i];
      if (f.kind() == Kind::Pow && f.exponent() < 0) {
        den.push_back(power_body(f.base(), -f.exponent()));
      } else if (f.is_number()) {
        const Rational& v = f.value();
        if (v.get_den() != 1) den.push_back(v.get_den().get_str());
        mpz_class n = v.get_num();
        if (n != 1 || e.args().size() == 1) num.push_back(n.get_str());
      } else if (f.kind() == Kind::Add || is_negative(f)) {
        num.push_back("\\left(" + print(f) + "\\right)");
      } else {
        num.push_back(print(f));
      }
    }
    auto join = [](const std::vector<std::string>& v) {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + v[i];
      return out.empty() ? std::string("1") : out;
    };
    if (den.empty()) return join(num);
    return "\\frac{" + join(num) + "}{" + join(den) + "}";
  }
};

void tree(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Kind::Number:
      out += "(num " + e.value().get_str() + ")";
      return;
    case Kind::Symbol:
      out += (e.symbol().cls == SymbolClass::Constant ? "(const " : "(sym ") + e.symbol().name + ")";
      return;
    case Kind::Func:
      out += std::string("(") + fn_name(e.fn()) + " ";
      tree(e.base(), out);
      out += ")";
      return;
    case Kind::Opaque:
      out += "(fun " + e.name() + " (d";
      for (int d : e.derivs()) out += " " + std::to_string(d);
      out += ")";
      for (const auto& a : e.args()) {
        out += " ";
        tree(a, out);
      }
      out += ")";
      return;
    case Kind::Pow:
      out += "(pow ";
      tree(e.base(), out);
      out += " " + std::to_string(e.exponent()) + ")";
      return;
    case Kind::Mul:
    case Kind::Add:
      out += e.kind() == Kind::Mul ? "(mul" : "(add";
      for (const auto& a : e.args()) {
        out += " ";
        tree(a, out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::string to_plain(const Expr& e) { return PlainPrinter{}.print(e); }
std::string to_latex(const Expr& e) { return LatexPrinter{}.print(e); }

std::string to_tree(const Expr& e) {
  std::string out;
  tree(e, out);
  return out;
}

std::string render(const Expr& e, Format format) {
  switch (format) {
    case Format::Latex: return to_latex(e);
    case Format::Tree: return to_tree(e);
    default: return to_plain(e);
  }
}

// ----------------------------------------------------------------- parsing

ParseError::ParseError(const std::string& message, int line, int column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      message_(message),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  enum Type { End, Number, Ident, Op } type = End;
  std::string text;
  int pos = 0;
};

class Lexer {
 public:
  Lexer(std::string_view s, const ParseContext& ctx) : s_(s), ctx_(ctx) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (true) {
      while (i < s_.size() && std::isspace(static_cast<unsigned char>(s_[i]))) ++i;
      Token t;
      t.pos = static_cast<int>(i);
      if (i == s_.size()) {
        out.push_back(t);
        return out;
      }
      char c = s_[i];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        t.type = Token::Number;
        t.text = std::string(s_.substr(i, j - i));
        i = j;
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < s_.size() && std::isalnum(static_cast<unsigned char>(s_[j]))) ++j;
        if (j < s_.size() && s_[j] == '_') {
          ++j;
          if (j < s_.size() && s_[j] == '{') {
            auto close = s_.find('}', j);
            if (close == std::string_view::npos) fail("unterminated subscript", static_cast<int>(j));
            j = close + 1;
          } else {
            std::size_t k = j;
            while (j < s_.size() && std::isalnum(static_cast<unsigned char>(s_[j]))) ++j;
            if (j == k) fail("empty subscript", static_cast<int>(k));
          }
        }
        t.type = Token::Ident;
        t.text = std::string(s_.substr(i, j - i));
        i = j;
      } else if (std::string_view("+-*/^(),").find(c) != std::string_view::npos) {
        t.type = Token::Op;
        t.text = std::string(1, c);
        ++i;
      } else {
        fail(std::string("unexpected character '") + c + "'", static_cast<int>(i));
      }
      out.push_back(t);
    }
  }

  [[noreturn]] void fail(const std::string& msg, int pos) const {
    throw ParseError("grammar error: " + msg, ctx_.line, ctx_.column + pos);
  }

 private:
  std::string_view s_;
  const ParseContext& ctx_;
};

std::optional<Fn> builtin(const std::string& name) {
  if (name == "sin") return Fn::Sin;
  if (name == "cos") return Fn::Cos;
  if (name == "tan") return Fn::Tan;
  if (name == "exp") return Fn::Exp;
  if (name == "log") return Fn::Log;
  if (name == "sqrt") return Fn::Sqrt;
  return std::nullopt;
}

class Parser {
 public:
  Parser(std::string_view text, const ParseContext& ctx) : ctx_(ctx) {
    toks_ = Lexer(text, ctx).run();
  }

  Expr parse() {
    Expr e = expr();
    if (peek().type != Token::End) fail("grammar error: unexpected '" + peek().text + "'", peek());
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool accept(const char* op) {
    if (peek().type == Token::Op && peek().text == op) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const char* op) {
    if (!accept(op)) {
      std::string got = peek().type == Token::End ? "end of input" : "'" + peek().text + "'";
      fail(std::string("grammar error: expected '") + op + "' but found " + got, peek());
    }
  }
  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, ctx_.line, ctx_.column + at.pos);
  }

  Expr expr() {
    std::vector<Expr> terms{term()};
    while (true) {
      if (accept("+")) {
        terms.push_back(term());
      } else if (accept("-")) {
        terms.push_back(-term());
      } else {
        break;
      }
    }
    return Expr::add(std::move(terms));
  }

  Expr term() {
    Expr acc = unary();
    while (true) {
      if (accept("*")) {
        acc = acc * unary();
      } else if (accept("/")) {
        const Token& at = peek();
        Expr d = unary();
        if (acc.is_number() && d.is_number()) {
          if (d.is_zero()) fail("zero denominator", at);
          acc = Expr(Rational(acc.value() / d.value()));
        } else {
          acc = acc / d;
        }
      } else {
        return acc;
      }
    }
  }

  Expr unary() {
    if (accept("-")) return -unary();
    if (accept("+")) return unary();
    return power();
  }

  int integer_exponent() {
    bool paren = accept("(");
    bool neg = accept("-");
    const Token& t = peek();
    if (t.type != Token::Number) fail("grammar error: exponent must be an integer", t);
    ++pos_;
    if (paren) expect(")");
    long v = std::stol(t.text);
    if (v > 10000) fail("grammar error: exponent too large", t);
    return static_cast<int>(neg ? -v : v);
  }

  Expr power() {
    Expr b = primary();
    if (accept("^")) {
      int k = integer_exponent();
      if (b.is_number()) {
        if (b.is_zero() && k < 0) fail("zero denominator", peek());
        Rational r = 1;
        for (int i = 0; i < std::abs(k); ++i) r *= b.value();
        return Expr(k < 0 ? Rational(1 / r) : r);
      }
      return pow(b, k);
    }
    return b;
  }

  std::vector<Expr> call_args() {
    std::vector<Expr> args;
    if (accept(")")) return args;
    args.push_back(expr());
    while (accept(",")) args.push_back(expr());
    expect(")");
    return args;
  }

  Expr primary() {
    const Token t = peek();
    if (t.type == Token::Number) {
      ++pos_;
      return Expr(Rational(mpz_class(t.text)));
    }
    if (accept("(")) {
      Expr e = expr();
      expect(")");
      return e;
    }
    if (t.type != Token::Ident) {
      std::string got = t.type == Token::End ? "end of input" : "'" + t.text + "'";
      fail("grammar error: unexpected " + got, t);
    }
    ++pos_;
    if (accept("(")) return call(t);
    if (ctx_.symbol) {
      if (auto s = ctx_.symbol(t.text)) return *s;
    }
    if (t.text == "pi") return Expr::pi();
    fail("unknown identifier '" + t.text + "'", t);
  }

  Expr call(const Token& t) {
    if (t.text == "deriv") {
      const Token& at = peek();
      Expr f = expr();
      if (f.kind() != Kind::Opaque) fail("grammar error: deriv expects a declared function", at);
      std::vector<int> derivs(f.derivs().begin(), f.derivs().end());
      for (std::size_t j = 0; j < derivs.size(); ++j) {
        expect(",");
        const Token& n = peek();
        if (n.type != Token::Number) fail("grammar error: derivative count must be an integer", n);
        ++pos_;
        derivs[j] += std::stoi(n.text);
      }
      if (peek().type == Token::Op && peek().text == ",") fail("arity mismatch in deriv", peek());
      expect(")");
      return Expr::opaque(f.name(), {f.args().begin(), f.args().end()}, std::move(derivs));
    }
    std::vector<Expr> args = call_args();
    if (auto fn = builtin(t.text)) {
      if (args.size() != 1) fail("arity mismatch: " + t.text + " takes 1 argument", t);
      return Expr::func(*fn, args[0]);
    }
    std::optional<int> arity;
    if (ctx_.function_arity) arity = ctx_.function_arity(t.text);
    if (!arity) fail("unknown identifier '" + t.text + "'", t);
    if (static_cast<int>(args.size()) != *arity)
      fail("arity mismatch: " + t.text + " takes " + std::to_string(*arity) + " argument(s)", t);
    return Expr::opaque(t.text, std::move(args));
  }

  const ParseContext& ctx_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

class TreeReader {
 public:
  TreeReader(std::string_view s, const ParseContext& ctx) : s_(s), ctx_(ctx) {}

  Expr read() {
    Expr e = node();
    skip();
    if (i_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("grammar error: " + msg, ctx_.line, ctx_.column + static_cast<int>(i_));
  }
  std::string atom() {
    skip();
    std::size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' && s_[j] != ')') ++j;
    if (j == i_) fail("expected a token");
    std::string out(s_.substr(i_, j - i_));
    i_ = j;
    return out;
  }
  void open() {
    skip();
    if (i_ >= s_.size() || s_[i_] != '(') fail("expected '('");
    ++i_;
  }
  bool close() {
    skip();
    if (i_ < s_.size() && s_[i_] == ')') {
      ++i_;
      return true;
    }
    return false;
  }
  std::vector<Expr> children() {
    std::vector<Expr> out;
    while (!close()) {
      if (i_ >= s_.size()) fail("unterminated node");
      out.push_back(node());
    }
    return out;
  }

  Expr node() {
    open();
    std::string tag = atom();
    if (tag == "num") {
      std::string v = atom();
      if (!close()) fail("expected ')'");
      try {
        Rational r(v);
        r.canonicalize();
        return Expr(r);
      } catch (const std::invalid_argument&) {
        fail("bad number '" + v + "'");
      }
    }
    if (tag == "sym" || tag == "const") {
      std::string name = atom();
      if (!close()) fail("expected ')'");
      if (tag == "const" && name == "pi") return Expr::pi();
      if (ctx_.symbol)
        if (auto s = ctx_.symbol(name)) return *s;
      fail("unknown identifier '" + name + "'");
    }
    if (tag == "pow") {
      Expr b = node();
      int k = std::stoi(atom());
      if (!close()) fail("expected ')'");
      return Expr::pow(b, k);
    }
    if (tag == "add" || tag == "mul") {
      auto kids = children();
      return tag == "add" ? Expr::add(std::move(kids)) : Expr::mul(std::move(kids));
    }
    if (tag == "fun") {
      std::string name = atom();
      open();
      if (atom() != "d") fail("expected derivative list");
      std::vector<int> derivs;
      while (!close()) derivs.push_back(std::stoi(atom()));
      auto kids = children();
      if (kids.size() != derivs.size()) fail("arity mismatch for " + name);
      return Expr::opaque(name, std::move(kids), std::move(derivs));
    }
    if (auto fn = builtin(tag)) {
      Expr a = node();
      if (!close()) fail("expected ')'");
      return Expr::func(*fn, a);
    }
    fail("unknown tag '" + tag + "'");
  }

  std::string_view s_;
  const ParseContext& ctx_;
  std::size_t i_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, const ParseContext& ctx) { return Parser(text, ctx).parse(); }

Expr parse_tree(std::string_view text, const ParseContext& ctx) { return TreeReader(text, ctx).read(); }

}  // namespace jetvar
