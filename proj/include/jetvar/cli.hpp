#pragma once

// Problem files and the command driver behind the jetvar executable.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jetvar/riemann.hpp"
#include "jetvar/syntax.hpp"

namespace jetvar::cli {

struct Diagnostic {
  std::string message;
  int line = 0;
  int column = 0;
  std::string render(const std::string& source_name) const;
};

struct NamedField {
  std::string name;
  ProjectableVectorField field;
};

/// Named section values, by field name, as expressions in the base coordinates.
struct Binding {
  std::string name;
  std::map<std::string, Expr> values;
};

struct Span {
  double t0 = 0;
  double t1 = 10;
  double h = 1e-3;
};

struct Problem {
  JetBundle bundle{{"t"}, {"y"}};
  std::optional<Lagrangian> lagrangian;
  std::optional<Metric> metric;
  std::optional<SourceForm> source;
  std::vector<NamedField> fields;
  std::map<std::string, LiftRule> rules;
  std::vector<std::string> variation;  // adjoined variation names, may be empty
  std::vector<Binding> bindings;
  std::map<std::string, double> initial;  // jet coordinate name -> value
  std::optional<Span> span;
  std::set<std::string> parameters;
  std::map<std::string, double> values;  // numeric values of parameters
  std::map<std::string, int> functions;  // opaque functions and arities
  std::map<std::string, Expr> currents;  // extra quantities to track in `integrate`

  /// Identifier resolution on `bundle` (the problem bundle or one built from it).
  ParseContext context(const JetBundle& bundle) const;
  AdjoinedVariation adjoined() const;
  const NamedField* find_field(const std::string& name) const;
  const Binding* find_binding(const std::string& name) const;
};

struct ParseResult {
  std::optional<Problem> problem;
  std::optional<Diagnostic> error;
};

/// Total: malformed input yields a diagnostic, never an exception.
ParseResult parse_problem(std::string_view text, std::optional<int> order_cap = std::nullopt);

struct Options {
  Format format = Format::Plain;
  std::uint64_t seed = 20240611;
  double tol = 1e-9;
  std::optional<std::string> bind;
  std::optional<std::string> field;
};

struct Outcome {
  int code = 0;  // 0 ok, 1 verification failure, 2 input error
  std::string out;
  std::string err;
};

const std::vector<std::string>& subcommands();

Outcome run(const std::string& subcommand, const Problem& problem, const Options& options);

}  // namespace jetvar::cli
