#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "jetvar/cli.hpp"

namespace jetvar::cli {

std::string Diagnostic::render(const std::string& source_name) const {
  std::ostringstream os;
  os << source_name << ":" << line << ":" << column << ": error: " << message;
  return os.str();
}

namespace {

bool is_name(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
}

bool reserved(const std::string& s) {
  static const std::set<std::string> words{"sin", "cos", "tan", "exp", "log", "sqrt", "deriv", "pi"};
  return words.count(s) > 0;
}

// A piece of a source line with the column of its first character.
struct Piece {
  std::string text;
  int column = 1;
};

struct Failure {
  Diagnostic d;
};

[[noreturn]] void fail(const std::string& message, int line, int column) { throw Failure{{message, line, column}}; }

Piece trim(const Piece& p) {
  std::size_t b = 0, e = p.text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(p.text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(p.text[e - 1]))) --e;
  return {p.text.substr(b, e - b), p.column + static_cast<int>(b)};
}

// Splits at separators outside brackets and parentheses.
std::vector<Piece> split_top(const Piece& p, char sep, int line) {
  std::vector<Piece> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < p.text.size(); ++i) {
    char c = p.text[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (depth < 0) fail("grammar error: unbalanced '" + std::string(1, c) + "'", line, p.column + static_cast<int>(i));
    if (c == sep && depth == 0) {
      out.push_back(trim({p.text.substr(start, i - start), p.column + static_cast<int>(start)}));
      start = i + 1;
    }
  }
  if (depth != 0) fail("grammar error: unbalanced brackets", line, p.column + static_cast<int>(p.text.size()));
  out.push_back(trim({p.text.substr(start), p.column + static_cast<int>(start)}));
  return out;
}

// "[a, b, c]" -> pieces a, b, c.
std::vector<Piece> bracket_list(const Piece& raw, int line) {
  Piece p = trim(raw);
  if (p.text.size() < 2 || p.text.front() != '[' || p.text.back() != ']')
    fail("grammar error: expected a bracketed list", line, p.column);
  Piece inner{p.text.substr(1, p.text.size() - 2), p.column + 1};
  if (trim(inner).text.empty()) return {};
  auto items = split_top(inner, ',', line);
  for (const auto& it : items)
    if (it.text.empty()) fail("grammar error: empty list entry", line, it.column);
  return items;
}

// Splits "lhs = rhs" at the first top-level '='.
std::pair<Piece, Piece> split_assignment(const Piece& p, int line) {
  auto pos = p.text.find('=');
  if (pos == std::string::npos) fail("grammar error: expected '='", line, p.column + static_cast<int>(p.text.size()));
  return {trim({p.text.substr(0, pos), p.column}),
          trim({p.text.substr(pos + 1), p.column + static_cast<int>(pos) + 1})};
}

std::vector<Piece> words(const Piece& p) {
  std::vector<Piece> out;
  std::size_t i = 0;
  while (i < p.text.size()) {
    while (i < p.text.size() && std::isspace(static_cast<unsigned char>(p.text[i]))) ++i;
    std::size_t b = i;
    while (i < p.text.size() && !std::isspace(static_cast<unsigned char>(p.text[i]))) ++i;
    if (i > b) out.push_back({p.text.substr(b, i - b), p.column + static_cast<int>(b)});
  }
  return out;
}

double number(const Piece& p, int line) {
  double v = 0;
  const char* b = p.text.data();
  const char* e = b + p.text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) fail("grammar error: expected a number, found '" + p.text + "'", line, p.column);
  return v;
}

int integer(const Piece& p, int line) {
  int v = 0;
  const char* b = p.text.data();
  const char* e = b + p.text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || v < 0)
    fail("grammar error: expected a non-negative integer, found '" + p.text + "'", line, p.column);
  return v;
}

struct Line {
  int number = 0;
  std::string keyword;
  Piece rest;
  int keyword_column = 1;
};

class Reader {
 public:
  explicit Reader(std::optional<int> cap) : cap_(cap) {}

  Problem read(std::string_view text) {
    std::vector<Line> lines = split_lines(text);
    for (const auto& l : lines) declare(l);
    finish_declarations(lines);
    for (const auto& l : lines) define(l);
    finish();
    return std::move(p_);
  }

 private:
  std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> out;
    int number = 0;
    std::size_t at = 0;
    while (at <= text.size()) {
      std::size_t end = text.find('\n', at);
      if (end == std::string_view::npos) end = text.size();
      std::string raw(text.substr(at, end - at));
      at = end + 1;
      ++number;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      for (std::size_t i = 0; i < raw.size(); ++i) {
        unsigned char c = raw[i];
        if (c < 0x20 && c != '\t') fail("grammar error: control character in input", number, static_cast<int>(i) + 1);
      }
      Piece all = trim({raw, 1});
      if (all.text.empty()) continue;
      std::size_t k = 0;
      while (k < all.text.size() && (std::isalnum(static_cast<unsigned char>(all.text[k])))) ++k;
      if (k == 0) fail("grammar error: expected a directive", number, all.column);
      Line l;
      l.number = number;
      l.keyword = all.text.substr(0, k);
      l.keyword_column = all.column;
      l.rest = trim({all.text.substr(k), all.column + static_cast<int>(k)});
      out.push_back(std::move(l));
      if (at > text.size()) break;
    }
    return out;
  }

  void new_name(const Piece& w, int line) {
    if (!is_name(w.text)) fail("grammar error: invalid name '" + w.text + "'", line, w.column);
    if (reserved(w.text)) fail("grammar error: '" + w.text + "' is reserved", line, w.column);
    if (!names_.insert(w.text).second) fail("duplicate declaration of '" + w.text + "'", line, w.column);
  }

  void declare(const Line& l) {
    const auto& k = l.keyword;
    if (k == "base" || k == "fields" || k == "param" || k == "variation") {
      auto ws = words(l.rest);
      if (ws.empty()) fail("grammar error: '" + k + "' needs at least one name", l.number, l.rest.column);
      for (const auto& w : ws) {
        new_name(w, l.number);
        if (k == "base") base_.push_back(w.text);
        if (k == "fields") fields_.push_back(w.text);
        if (k == "param") p_.parameters.insert(w.text);
        if (k == "variation") p_.variation.push_back(w.text);
      }
      if (k == "variation") variation_line_ = l.number;
    } else if (k == "function") {
      auto ws = words(l.rest);
      if (ws.size() != 2) fail("grammar error: expected 'function NAME ARITY'", l.number, l.rest.column);
      new_name(ws[0], l.number);
      int arity = integer(ws[1], l.number);
      if (arity < 1) fail("grammar error: arity must be positive", l.number, ws[1].column);
      p_.functions[ws[0].text] = arity;
    } else if (k == "rule") {
      // Rule parameters act as opaque functions of the base coordinates.
      auto open = l.rest.text.find('(');
      auto close = l.rest.text.find(')');
      if (open == std::string::npos || close == std::string::npos || close < open)
        fail("grammar error: expected 'rule NAME(xi, ...) order R K = [...]'", l.number, l.rest.column);
      Piece name = trim({l.rest.text.substr(0, open), l.rest.column});
      new_name(name, l.number);
      Piece inner{l.rest.text.substr(open + 1, close - open - 1), l.rest.column + static_cast<int>(open) + 1};
      std::vector<std::string> xi;
      for (const auto& w : split_top(inner, ',', l.number)) {
        new_name(w, l.number);
        xi.push_back(w.text);
      }
      rule_params_[name.text] = xi;
    }
  }

  void finish_declarations(const std::vector<Line>& lines) {
    int first = lines.empty() ? 1 : lines.front().number;
    if (base_.empty()) fail("missing 'base' declaration", first, 1);
    if (fields_.empty()) fail("missing 'fields' declaration", first, 1);
    int cap = cap_.value_or(8);
    if (cap < 1) fail("order cap must be at least 1", first, 1);
    p_.bundle = JetBundle(base_, fields_, 1, cap);
    for (const auto& [rule, xi] : rule_params_)
      for (const auto& x : xi) rule_functions_[x] = static_cast<int>(base_.size());
    for (const auto& l : lines) {
      if (l.keyword != "angle") continue;
      for (const auto& w : words(l.rest)) {
        auto i = p_.bundle.field_index(w.text);
        if (!i) fail("unknown field '" + w.text + "'", l.number, w.column);
        p_.bundle.mark_angle(*i);
      }
    }
  }

  ParseContext context(const JetBundle& b, int line, int column, bool rule_params = false) const {
    ParseContext ctx = p_.context(b);
    if (rule_params) {
      auto base = ctx.function_arity;
      auto extra = rule_functions_;
      ctx.function_arity = [base, extra](const std::string& name) -> std::optional<int> {
        if (auto it = extra.find(name); it != extra.end()) return it->second;
        return base(name);
      };
    }
    ctx.line = line;
    ctx.column = column;
    return ctx;
  }

  Expr expr(const Piece& p, int line, const JetBundle& b, bool rule_params = false) const {
    if (p.text.empty()) fail("grammar error: expected an expression", line, p.column);
    return normalize(parse_expr(p.text, context(b, line, p.column, rule_params)));
  }

  Expr expr(const Piece& p, int line) const { return expr(p, line, p_.bundle); }

  // Expressions in the base coordinates only.
  Expr base_expr(const Piece& p, int line) const {
    Expr e = expr(p, line);
    if (!jet_keys(p_.bundle, e).empty())
      fail("expected an expression in the base coordinates", line, p.column);
    return e;
  }

  void define(const Line& l) {
    const auto& k = l.keyword;
    int n = l.number;
    if (k == "base" || k == "fields" || k == "param" || k == "variation" || k == "function" || k == "angle") return;
    if (k == "lagrangian") {
      if (lagrangian_line_) fail("only one Lagrangian per file (first at line " + std::to_string(lagrangian_line_) + ")", n, l.keyword_column);
      lagrangian_line_ = n;
      auto [lhs, rhs] = split_assignment(l.rest, n);
      auto ws = words(lhs);
      if (!ws.empty()) {
        if (ws.size() != 2 || ws[0].text != "order") fail("grammar error: expected 'lagrangian [order N] = ...'", n, lhs.column);
        declared_order_ = integer(ws[1], n);
        if (declared_order_ < 1) fail("Lagrangian order must be at least 1", n, ws[1].column);
      }
      density_ = expr(rhs, n);
      density_column_ = rhs.column;
    } else if (k == "metric") {
      if (metric_line_) fail("only one metric per file", n, l.keyword_column);
      metric_line_ = n;
      auto [lhs, rhs] = split_assignment(l.rest, n);
      if (!is_name(lhs.text)) fail("grammar error: expected 'metric NAME = [[...], ...]'", n, lhs.column);
      auto rows = bracket_list(rhs, n);
      Matrix g;
      for (const auto& row : rows) {
        std::vector<Expr> entries;
        for (const auto& e : bracket_list(row, n)) {
          Expr v = expr(e, n);
          for (const auto& key : jet_keys(p_.bundle, v))
            if (key.alpha.order() > 0) fail("metric entries may not contain derivatives", n, e.column);
          entries.push_back(v);
        }
        g.push_back(std::move(entries));
      }
      if (base_.size() != 1) fail("a metric needs a single base coordinate (time)", n, l.keyword_column);
      if (g.size() != fields_.size()) fail("metric must be " + std::to_string(fields_.size()) + "x" + std::to_string(fields_.size()) + " (one row per field)", n, rhs.column);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i].size() != fields_.size()) fail("metric row " + std::to_string(i + 1) + " has the wrong length", n, rows[i].column);
      try {
        Metric m = make_metric(fields_, g, base_[0]);
        metric_ = std::move(m);
      } catch (const Error& e) {
        fail(std::string("invalid metric: ") + e.what(), n, rhs.column);
      }
    } else if (k == "source") {
      auto [lhs, rhs] = split_assignment(l.rest, n);
      if (!lhs.text.empty()) fail("grammar error: expected 'source = [...]'", n, lhs.column);
      SourceForm s;
      for (const auto& e : bracket_list(rhs, n)) s.components.push_back(expr(e, n));
      if (s.components.size() != fields_.size()) fail("source form needs one component per field", n, rhs.column);
      p_.source = std::move(s);
    } else if (k == "vector") {
      auto [lhs, rhs] = split_assignment(l.rest, n);
      check_new_object(lhs, n);
      Piece body = trim(rhs);
      if (body.text.size() < 2 || body.text.front() != '[' || body.text.back() != ']')
        fail("grammar error: expected 'vector NAME = [base...; fiber...]'", n, body.column);
      auto halves = split_top({body.text.substr(1, body.text.size() - 2), body.column + 1}, ';', n);
      if (halves.size() != 2) fail("grammar error: separate base and fiber components with ';'", n, body.column);
      ProjectableVectorField f;
      for (const auto& e : split_top(halves[0], ',', n)) f.base.push_back(expr(e, n));
      for (const auto& e : split_top(halves[1], ',', n)) f.fiber.push_back(expr(e, n));
      if (f.base.size() != base_.size()) fail("expected " + std::to_string(base_.size()) + " base component(s)", n, halves[0].column);
      if (f.fiber.size() != fields_.size()) fail("expected " + std::to_string(fields_.size()) + " fiber component(s)", n, halves[1].column);
      try {
        f.validate(p_.bundle);
      } catch (const Error& e) {
        fail(std::string("vector field '") + lhs.text + "' is not projectable: " + e.what(), n, body.column);
      }
      p_.fields.push_back({lhs.text, std::move(f)});
    } else if (k == "rule") {
      auto [lhs, rhs] = split_assignment(l.rest, n);
      auto open = lhs.text.find('(');
      std::string name = trim({lhs.text.substr(0, open), 0}).text;
      auto close = lhs.text.find(')');
      Piece tail = trim({lhs.text.substr(close + 1), lhs.column + static_cast<int>(close) + 1});
      auto ws = words(tail);
      LiftRule r;
      r.name = name;
      r.xi_names = rule_params_.at(name);
      if (r.xi_names.size() != base_.size())
        fail("a lift rule takes one parameter per base coordinate", n, lhs.column);
      if (!ws.empty()) {
        if (ws.size() != 3 || ws[0].text != "order") fail("grammar error: expected 'order R K'", n, tail.column);
        r.r = integer(ws[1], n);
        r.k = integer(ws[2], n);
      }
      for (const auto& e : bracket_list(rhs, n)) r.fiber.push_back(expr(e, n, p_.bundle, true));
      if (r.fiber.size() != fields_.size()) fail("rule needs one template per field", n, rhs.column);
      p_.rules[name] = std::move(r);
    } else if (k == "lift") {
      auto [lhs, rhs] = split_assignment(l.rest, n);
      check_new_object(lhs, n);
      Piece body = trim(rhs);
      auto open = body.text.find('[');
      if (open == std::string::npos) fail("grammar error: expected 'lift NAME = RULE [xi...]'", n, body.column);
      Piece rule_name = trim({body.text.substr(0, open), body.column});
      LiftRule rule;
      if (auto it = p_.rules.find(rule_name.text); it != p_.rules.end()) {
        rule = it->second;
      } else {
        try {
          if (rule_name.text == "tangent") rule = tangent_rule(p_.bundle);
          else if (rule_name.text == "cotangent") rule = cotangent_rule(p_.bundle);
          else if (rule_name.text == "covariant2") rule = covariant2_rule(p_.bundle);
          else fail("unknown lift rule '" + rule_name.text + "'", n, rule_name.column);
        } catch (const Error& e) {
          fail(std::string("rule '") + rule_name.text + "' does not fit these fields: " + e.what(), n, rule_name.column);
        }
      }
      std::vector<Expr> xi;
      for (const auto& e : bracket_list({body.text.substr(open), body.column + static_cast<int>(open)}, n))
        xi.push_back(base_expr(e, n));
      try {
        p_.fields.push_back({lhs.text, apply_lift(p_.bundle, rule, xi)});
      } catch (const Error& e) {
        fail(e.what(), n, body.column);
      }
    } else if (k == "bind") {
      auto colon = l.rest.text.find(':');
      if (colon == std::string::npos) fail("grammar error: expected 'bind NAME: field = expr, ...'", n, l.rest.column);
      Piece name = trim({l.rest.text.substr(0, colon), l.rest.column});
      if (name.text.empty() || name.text.find_first_of(" \t") != std::string::npos)
        fail("grammar error: invalid binding name", n, name.column);
      if (find_binding(name.text)) fail("duplicate binding '" + name.text + "'", n, name.column);
      Binding b{name.text, {}};
      Piece body{l.rest.text.substr(colon + 1), l.rest.column + static_cast<int>(colon) + 1};
      for (const auto& item : split_top(body, ',', n)) {
        auto [f, v] = split_assignment(item, n);
        if (!p_.bundle.adjoin(p_.variation).field_index(f.text)) fail("unknown field '" + f.text + "'", n, f.column);
        if (b.values.count(f.text)) fail("field '" + f.text + "' bound twice", n, f.column);
        b.values[f.text] = base_expr(v, n);
      }
      p_.bindings.push_back(std::move(b));
    } else if (k == "initial") {
      for (const auto& item : split_top(l.rest, ',', n)) {
        auto [c, v] = split_assignment(item, n);
        auto sym = p_.bundle.resolve(c.text);
        if (!sym || !p_.bundle.decode(*sym)) fail("unknown jet coordinate '" + c.text + "'", n, c.column);
        p_.initial[to_plain(*sym)] = number(v, n);
      }
    } else if (k == "span") {
      auto ws = words(l.rest);
      if (ws.size() != 3) fail("grammar error: expected 'span T0 T1 STEP'", n, l.rest.column);
      Span s{number(ws[0], n), number(ws[1], n), number(ws[2], n)};
      if (!(s.h > 0) || !(s.t1 > s.t0)) fail("span needs T1 > T0 and a positive step", n, l.rest.column);
      p_.span = s;
    } else if (k == "value") {
      auto [name, v] = split_assignment(l.rest, n);
      if (!p_.parameters.count(name.text)) fail("unknown parameter '" + name.text + "'", n, name.column);
      p_.values[name.text] = number(v, n);
    } else if (k == "current") {
      auto [name, v] = split_assignment(l.rest, n);
      check_new_object(name, n);
      p_.currents[name.text] = expr(v, n);
    } else {
      fail("grammar error: unknown directive '" + k + "'", n, l.keyword_column);
    }
  }

  void check_new_object(const Piece& name, int line) {
    if (!is_name(name.text)) fail("grammar error: invalid name '" + name.text + "'", line, name.column);
    if (p_.find_field(name.text) || p_.currents.count(name.text))
      fail("duplicate declaration of '" + name.text + "'", line, name.column);
  }

  const Binding* find_binding(const std::string& name) const { return p_.find_binding(name); }

  void finish() {
    if (metric_ && density_)
      fail("declare either a metric or a Lagrangian, not both", lagrangian_line_, 1);
    int order = 1;
    if (density_) {
      int actual = std::max(1, jet_order(p_.bundle, *density_));
      if (declared_order_ && declared_order_ < actual)
        fail("Lagrangian depends on derivatives of order " + std::to_string(actual) + " but is declared of order " +
                 std::to_string(declared_order_),
             lagrangian_line_, density_column_);
      order = declared_order_ ? declared_order_ : actual;
    }
    JetBundle b = p_.bundle;
    p_.bundle = JetBundle(base_, fields_, order, b.cap());
    for (int i = 0; i < b.m(); ++i) p_.bundle.mark_angle(i, b.is_angle(i));
    if (4 * order + 1 > p_.bundle.cap()) p_.bundle = p_.bundle.with_order(order);
    if (density_) p_.lagrangian = Lagrangian{p_.bundle, *density_};
    if (metric_) {
      metric_->bundle = p_.bundle;
      p_.metric = metric_;
      p_.lagrangian = geodesic_energy(*metric_);
      p_.lagrangian->bundle = p_.bundle;
    }
    if (!p_.variation.empty() && p_.variation.size() != fields_.size())
      fail("'variation' needs one name per field (" + std::to_string(fields_.size()) + ")", variation_line_, 1);
  }

  std::optional<int> cap_;
  Problem p_;
  std::set<std::string> names_;
  std::vector<std::string> base_, fields_;
  std::map<std::string, std::vector<std::string>> rule_params_;
  std::map<std::string, int> rule_functions_;
  std::optional<Expr> density_;
  std::optional<Metric> metric_;
  int declared_order_ = 0;
  int lagrangian_line_ = 0;
  int metric_line_ = 0;
  int density_column_ = 1;
  int variation_line_ = 1;
};

}  // namespace

ParseContext Problem::context(const JetBundle& b) const {
  ParseContext ctx;
  auto params = parameters;
  ctx.symbol = [b, params](const std::string& name) -> std::optional<Expr> {
    if (auto s = b.resolve(name)) return s;
    if (params.count(name)) return Expr::parameter(name);
    return std::nullopt;
  };
  auto fns = functions;
  ctx.function_arity = [fns](const std::string& name) -> std::optional<int> {
    if (auto it = fns.find(name); it != fns.end()) return it->second;
    return std::nullopt;
  };
  return ctx;
}

AdjoinedVariation Problem::adjoined() const { return adjoin_variation(bundle, variation); }

const NamedField* Problem::find_field(const std::string& name) const {
  for (const auto& f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

const Binding* Problem::find_binding(const std::string& name) const {
  for (const auto& b : bindings)
    if (b.name == name) return &b;
  return nullptr;
}

ParseResult parse_problem(std::string_view text, std::optional<int> order_cap) {
  ParseResult out;
  try {
    out.problem = Reader(order_cap).read(text);
  } catch (const Failure& f) {
    out.error = f.d;
  } catch (const ParseError& e) {
    out.error = Diagnostic{e.message(), e.line(), e.column()};
  } catch (const std::exception& e) {
    out.error = Diagnostic{e.what(), 1, 1};
  }
  return out;
}

}  // namespace jetvar::cli
