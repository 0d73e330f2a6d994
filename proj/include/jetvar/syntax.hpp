#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "jetvar/expr.hpp"

namespace jetvar {

enum class Format { Plain, Latex, Tree };

std::string to_plain(const Expr& e);
std::string to_latex(const Expr& e);
std::string to_tree(const Expr& e);
std::string render(const Expr& e, Format format);

/// Parse failure with a 1-based source location.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column);
  const std::string& message() const noexcept { return message_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

struct ParseContext {
  /// Maps an identifier (as written, e.g. "y_{tt}") to a symbol.
  std::function<std::optional<Expr>(const std::string&)> symbol;
  /// Arity of a declared opaque function, if any.
  std::function<std::optional<int>(const std::string&)> function_arity;
  int line = 1;
  int column = 1;  // column of the first character of the text
};

/// Infix grammar: + - * / and ^ with integer exponents, calls, rationals.
/// The result is not normalized.
Expr parse_expr(std::string_view text, const ParseContext& ctx);

/// Reads the s-expression encoding produced by to_tree.
Expr parse_tree(std::string_view text, const ParseContext& ctx);

}  // namespace jetvar
