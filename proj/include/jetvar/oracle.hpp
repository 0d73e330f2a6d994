#pragma once

// Numeric ground truth: random-point identity tests, finite differences,
// compiled evaluation and classic RK4 on derived equations.

#include <cstdint>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "jetvar/jet.hpp"

namespace jetvar {

struct Interval {
  double lo = -1;
  double hi = 1;
};

struct SamplingOptions {
  std::uint64_t seed = 20240611;
  int samples = 50;
  double tol = 1e-9;
  int retry_cap = 500;
  Interval fallback{-1, 1};
  Interval angle{0.1, std::numbers::pi - 0.1};
  std::set<std::string> angles;            // symbol names drawn from `angle`
  std::map<std::string, Interval> ranges;  // explicit per-symbol ranges
  Env env;                                 // fixed values and opaque rules
  std::function<void(Env&)> complete;      // fills dependent values per point
};

/// Seed from $JETVAR_SEED when set, else the given default.
std::uint64_t seed_from_environment(std::uint64_t fallback);

/// Marks the order-0 coordinates of angle fields.
SamplingOptions sampling_for(const JetBundle& bundle, SamplingOptions base = {});

struct IdentityReport {
  std::string expression;
  int samples = 0;
  int resampled = 0;
  double max_residual = 0;
  bool zero = false;
  std::string failure;  // set when sampling could not complete
};

/// Evaluates e at random points; the residual at each point is |e| over the
/// magnitude of e's largest additive term (at least 1e-300).
IdentityReport random_zero_test(const Expr& e, const SamplingOptions& options);

/// Compares partial(e, c) against central differences with step
/// 1e-6 * max(1, |c|); relative error bound `tol`.
IdentityReport fd_check(const Expr& e, const Expr& c, const SamplingOptions& options, double tol = 1e-6);

/// Cross-checks an opaque rule against finite differences of itself: the
/// value with one more derivative in slot j must match the difference
/// quotient of the value, for derivative counts up to max_order.
IdentityReport check_opaque_rule(const std::string& name, int arity, const OpaqueRule& rule,
                                 const SamplingOptions& options, int max_order = 1, double tol = 1e-6);

/// Flattened expression for repeated evaluation over fixed slots.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const std::vector<std::string>& slots, const Env& env);
  double operator()(const double* slots) const;

 private:
  enum class Op : std::uint8_t { Const, Slot, Add, Mul, Pow, Sin, Cos, Tan, Exp, Log, Sqrt, Opaque };
  struct Instr {
    Op op = Op::Const;
    double value = 0;
    int slot = 0;
    int exponent = 0;
    std::vector<int> args;
    std::vector<int> derivs;
  };
  std::vector<Instr> code_;
  std::vector<OpaqueRule> rules_;
  mutable std::vector<double> regs_;
};

/// ODE system E_i = 0 on a mechanics bundle, solved for the highest
/// derivatives (of common order r) by a linear solve at every stage.
struct NumericProblem {
  JetBundle bundle{{"t"}, {"y"}};
  std::vector<Expr> equations;
  Env env;                     // parameters and opaque rules
  std::vector<double> initial; // per field: y, y_t, ..., y_(r-1)
  double t0 = 0;
  double t1 = 10;
  double h = 1e-3;
};

struct Trajectory {
  int order = 0;                         // r
  std::vector<std::string> state_names;  // y, y_t, ... per field
  std::vector<std::string> top_names;    // y_(r) per field
  std::vector<double> t;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> tops;
};

/// Classic RK4 with fixed step. Throws Error naming t when the leading
/// coefficient matrix is singular.
Trajectory integrate(const NumericProblem& problem);

/// Values of t, the state and the top derivatives at sample k, merged over
/// the problem's environment.
Env state_env(const NumericProblem& problem, const Trajectory& trajectory, std::size_t k);

/// max_k |eps(t_k) - eps(t_0)|.
double drift(const NumericProblem& problem, const Trajectory& trajectory, const Expr& eps);

}  // namespace jetvar
