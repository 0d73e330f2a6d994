#include "jetvar/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <random>
#include <unordered_map>

#include "jetvar/syntax.hpp"

namespace jetvar {

std::uint64_t seed_from_environment(std::uint64_t fallback) {
  const char* v = std::getenv("JETVAR_SEED");
  if (!v || !*v) return fallback;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    return fallback;
  }
}

SamplingOptions sampling_for(const JetBundle& bundle, SamplingOptions base) {
  for (int i = 0; i < bundle.m(); ++i)
    if (bundle.is_angle(i)) base.angles.insert(bundle.field_name(i));
  return base;
}

namespace {

std::vector<std::string> sampled_symbols(const Expr& e, const SamplingOptions& o) {
  std::vector<std::string> out;
  for (const auto& s : free_symbols(e)) {
    const auto& info = s.symbol();
    if (info.cls == SymbolClass::Constant) continue;
    if (o.env.values.count(info.name)) continue;
    out.push_back(info.name);
  }
  return out;
}

Interval range_of(const std::string& name, const SamplingOptions& o) {
  auto it = o.ranges.find(name);
  if (it != o.ranges.end()) return it->second;
  if (o.angles.count(name)) return o.angle;
  return o.fallback;
}

// Draws points until `probe` succeeds `samples` times; domain errors are
// resampled up to the retry cap.
template <class Probe>
void sample_points(const std::vector<std::string>& names, const SamplingOptions& o, IdentityReport& report,
                   Probe probe) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int retries = 0;
  while (report.samples < o.samples) {
    Env env = o.env;
    for (const auto& n : names) {
      Interval r = range_of(n, o);
      env.values[n] = r.lo + (r.hi - r.lo) * unit(rng);
    }
    try {
      if (o.complete) o.complete(env);
      probe(env);
      ++report.samples;
    } catch (const EvalError& err) {
      if (err.reason() == EvalError::Reason::Unbound) {
        report.failure = err.what();
        return;
      }
      ++report.resampled;
      if (++retries > o.retry_cap) {
        report.failure = std::string("retry cap reached: ") + err.what();
        return;
      }
    }
  }
}

}  // namespace

IdentityReport random_zero_test(const Expr& e, const SamplingOptions& o) {
  IdentityReport report;
  report.expression = to_plain(e);
  auto names = sampled_symbols(e, o);
  sample_points(names, o, report, [&](const Env& env) {
    double v = eval(e, env);
    double scale = std::max(term_scale(e, env), 1e-300);
    double r = std::abs(v) / scale;
    if (!std::isfinite(r)) throw EvalError(EvalError::Reason::Domain, "non-finite residual");
    report.max_residual = std::max(report.max_residual, r);
  });
  report.zero = report.failure.empty() && report.max_residual <= o.tol;
  return report;
}

IdentityReport fd_check(const Expr& e, const Expr& c, const SamplingOptions& o, double tol) {
  IdentityReport report;
  Expr d = partial(e, c);
  report.expression = to_plain(e);
  std::string var = c.symbol().name;
  auto names = sampled_symbols(e + c, o);
  sample_points(names, o, report, [&](const Env& env) {
    double x = env.values.at(var);
    double h = 1e-6 * std::max(1.0, std::abs(x));
    Env lo = env, hi = env;
    lo.values[var] = x - h;
    hi.values[var] = x + h;
    double fd = (eval(e, hi) - eval(e, lo)) / (2 * h);
    double exact = eval(d, env);
    double r = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
    report.max_residual = std::max(report.max_residual, r);
  });
  report.zero = report.failure.empty() && report.max_residual <= tol;
  return report;
}

IdentityReport check_opaque_rule(const std::string& name, int arity, const OpaqueRule& rule,
                                 const SamplingOptions& o, int max_order, double tol) {
  IdentityReport report;
  report.expression = name;
  std::vector<std::string> names;
  for (int j = 0; j < arity; ++j) names.push_back("__arg" + std::to_string(j));
  std::vector<std::vector<int>> orders;
  std::vector<int> d(arity, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == arity) {
      orders.push_back(d);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      d[pos] = v;
      self(self, pos + 1, left - v);
    }
    d[pos] = 0;
  };
  rec(rec, 0, max_order - 1);
  sample_points(names, o, report, [&](const Env& env) {
    std::vector<double> x;
    for (const auto& n : names) x.push_back(env.values.at(n));
    for (const auto& base : orders) {
      for (int j = 0; j < arity; ++j) {
        std::vector<int> up = base;
        ++up[j];
        double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        std::vector<double> lo = x, hi = x;
        lo[j] -= h;
        hi[j] += h;
        double fd = (rule(hi, base) - rule(lo, base)) / (2 * h);
        double exact = rule(x, up);
        report.max_residual = std::max(report.max_residual, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
      }
    }
  });
  report.zero = report.failure.empty() && report.max_residual <= tol;
  return report;
}

// ------------------------------------------------------------ compilation

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& slots, const Env& env) {
  std::map<std::string, int> slot_of;
  for (std::size_t i = 0; i < slots.size(); ++i) slot_of[slots[i]] = static_cast<int>(i);
  std::unordered_map<const Node*, int> index;
  rules_.reserve(64);
  std::vector<std::string> rule_names;
  auto emit = [&](auto&& self, const Expr& x) -> int {
    auto it = index.find(x.node());
    if (it != index.end()) return it->second;
    Instr in;
    switch (x.kind()) {
      case Kind::Number:
        in.op = Op::Const;
        in.value = x.value().get_d();
        break;
      case Kind::Symbol: {
        const auto& name = x.symbol().name;
        auto s = slot_of.find(name);
        if (s != slot_of.end()) {
          in.op = Op::Slot;
          in.slot = s->second;
        } else if (auto v = env.values.find(name); v != env.values.end()) {
          in.op = Op::Const;
          in.value = v->second;
        } else if (x.symbol().cls == SymbolClass::Constant && name == "pi") {
          in.op = Op::Const;
          in.value = std::numbers::pi;
        } else {
          throw EvalError(EvalError::Reason::Unbound, "unbound symbol: " + name);
        }
        break;
      }
      case Kind::Add:
      case Kind::Mul:
        in.op = x.kind() == Kind::Add ? Op::Add : Op::Mul;
        for (const auto& a : x.args()) in.args.push_back(self(self, a));
        break;
      case Kind::Pow:
        in.op = Op::Pow;
        in.exponent = x.exponent();
        in.args.push_back(self(self, x.base()));
        break;
      case Kind::Func:
        switch (x.fn()) {
          case Fn::Sin: in.op = Op::Sin; break;
          case Fn::Cos: in.op = Op::Cos; break;
          case Fn::Tan: in.op = Op::Tan; break;
          case Fn::Exp: in.op = Op::Exp; break;
          case Fn::Log: in.op = Op::Log; break;
          case Fn::Sqrt: in.op = Op::Sqrt; break;
        }
        in.args.push_back(self(self, x.base()));
        break;
      case Kind::Opaque: {
        auto f = env.functions.find(x.name());
        if (f == env.functions.end()) throw EvalError(EvalError::Reason::Unbound, "unbound function: " + x.name());
        in.op = Op::Opaque;
        std::size_t r = 0;
        while (r < rule_names.size() && rule_names[r] != x.name()) ++r;
        if (r == rule_names.size()) {
          rule_names.push_back(x.name());
          rules_.push_back(f->second);
        }
        in.slot = static_cast<int>(r);
        in.derivs.assign(x.derivs().begin(), x.derivs().end());
        for (const auto& a : x.args()) in.args.push_back(self(self, a));
        break;
      }
    }
    code_.push_back(std::move(in));
    int id = static_cast<int>(code_.size()) - 1;
    index.emplace(x.node(), id);
    return id;
  };
  emit(emit, e);
  regs_.resize(code_.size());
}

double CompiledExpr::operator()(const double* slots) const {
  std::vector<double> args;
  for (std::size_t k = 0; k < code_.size(); ++k) {
    const Instr& in = code_[k];
    double v = 0;
    switch (in.op) {
      case Op::Const: v = in.value; break;
      case Op::Slot: v = slots[in.slot]; break;
      case Op::Add:
        for (int a : in.args) v += regs_[a];
        break;
      case Op::Mul:
        v = 1;
        for (int a : in.args) v *= regs_[a];
        break;
      case Op::Pow: {
        double b = regs_[in.args[0]];
        if (b == 0 && in.exponent < 0) throw EvalError(EvalError::Reason::Domain, "division by zero");
        v = std::pow(b, in.exponent);
        break;
      }
      case Op::Sin: v = std::sin(regs_[in.args[0]]); break;
      case Op::Cos: v = std::cos(regs_[in.args[0]]); break;
      case Op::Tan: v = std::tan(regs_[in.args[0]]); break;
      case Op::Exp: v = std::exp(regs_[in.args[0]]); break;
      case Op::Log:
        if (regs_[in.args[0]] <= 0) throw EvalError(EvalError::Reason::Domain, "log of non-positive value");
        v = std::log(regs_[in.args[0]]);
        break;
      case Op::Sqrt:
        if (regs_[in.args[0]] < 0) throw EvalError(EvalError::Reason::Domain, "sqrt of negative value");
        v = std::sqrt(regs_[in.args[0]]);
        break;
      case Op::Opaque:
        args.clear();
        for (int a : in.args) args.push_back(regs_[a]);
        v = rules_[in.slot](args, in.derivs);
        break;
    }
    regs_[k] = v;
  }
  return code_.empty() ? 0.0 : regs_.back();
}

// ------------------------------------------------------------------ RK4

namespace {

class OdeSystem {
 public:
  explicit OdeSystem(const NumericProblem& p) : p_(p) {
    const JetBundle& b = p.bundle;
    if (b.n() != 1) throw Error("numeric integration needs a single base coordinate");
    int m = b.m();
    if (static_cast<int>(p.equations.size()) != m) throw Error("need one equation per field");
    order_ = 0;
    for (const auto& e : p.equations) order_ = std::max(order_, jet_order(b, e));
    if (order_ == 0) throw Error("equations contain no derivatives");
    slots_.push_back(b.base_name(0));
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < order_; ++k) slots_.push_back(b.coord_name(i, MultiIndex({k})));
    for (int i = 0; i < m; ++i) tops_.push_back(b.coord(i, MultiIndex({order_})));
    Bindings zero_tops;
    for (const auto& t : tops_) zero_tops[t.symbol().name] = Expr(0);
    for (int i = 0; i < m; ++i) {
      b_.emplace_back(substitute(p.equations[i], zero_tops), slots_, p.env);
      std::vector<CompiledExpr> row;
      for (int j = 0; j < m; ++j) {
        Expr a = partial(p.equations[i], tops_[j]);
        for (const auto& t : tops_)
          if (depends_on(a, t)) throw Error("equations are not linear in the highest derivatives");
        row.emplace_back(a, slots_, p.env);
      }
      a_.push_back(std::move(row));
    }
    if (static_cast<int>(p.initial.size()) != m * order_)
      throw Error("expected " + std::to_string(m * order_) + " initial values");
  }

  int order() const { return order_; }
  int dim() const { return static_cast<int>(slots_.size()) - 1; }
  const std::vector<std::string>& slots() const { return slots_; }
  const std::vector<Expr>& tops() const { return tops_; }

  Eigen::VectorXd top(double t, const std::vector<double>& x) const {
    int m = p_.bundle.m();
    std::vector<double> s(slots_.size());
    s[0] = t;
    std::copy(x.begin(), x.end(), s.begin() + 1);
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
      rhs(i) = -b_[i](s.data());
      for (int j = 0; j < m; ++j) A(i, j) = a_[i][j](s.data());
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    lu.setThreshold(1e-12);
    if (!lu.isInvertible() || std::abs(A.determinant()) < 1e-14 * std::pow(scale, m))
      throw Error("singular leading coefficient matrix at t = " + std::to_string(t));
    return lu.solve(rhs);
  }

  std::vector<double> rate(double t, const std::vector<double>& x) const {
    int m = p_.bundle.m();
    std::vector<double> dx(x.size());
    Eigen::VectorXd tp = top(t, x);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k + 1 < order_; ++k) dx[i * order_ + k] = x[i * order_ + k + 1];
      dx[i * order_ + order_ - 1] = tp(i);
    }
    return dx;
  }

 private:
  const NumericProblem& p_;
  int order_ = 0;
  std::vector<std::string> slots_;
  std::vector<Expr> tops_;
  std::vector<CompiledExpr> b_;
  std::vector<std::vector<CompiledExpr>> a_;
};

}  // namespace

Trajectory integrate(const NumericProblem& p) {
  OdeSystem sys(p);
  Trajectory tr;
  tr.order = sys.order();
  tr.state_names.assign(sys.slots().begin() + 1, sys.slots().end());
  for (const auto& t : sys.tops()) tr.top_names.push_back(t.symbol().name);
  long steps = std::lround((p.t1 - p.t0) / p.h);
  if (steps <= 0) throw Error("empty integration span");
  std::vector<double> x = p.initial;
  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.states.push_back(x);
    Eigen::VectorXd tp = sys.top(t, x);
    tr.tops.emplace_back(tp.data(), tp.data() + tp.size());
  };
  record(p.t0);
  std::vector<double> tmp(x.size());
  for (long s = 0; s < steps; ++s) {
    double t = p.t0 + s * p.h, h = p.h;
    auto k1 = sys.rate(t, x);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    auto k2 = sys.rate(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    auto k3 = sys.rate(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + h * k3[i];
    auto k4 = sys.rate(t + h, tmp);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    record(p.t0 + (s + 1) * p.h);
  }
  return tr;
}

Env state_env(const NumericProblem& p, const Trajectory& tr, std::size_t k) {
  Env env = p.env;
  env.values[p.bundle.base_name(0)] = tr.t.at(k);
  for (std::size_t i = 0; i < tr.state_names.size(); ++i) env.values[tr.state_names[i]] = tr.states[k][i];
  for (std::size_t i = 0; i < tr.top_names.size(); ++i) env.values[tr.top_names[i]] = tr.tops[k][i];
  return env;
}

double drift(const NumericProblem& p, const Trajectory& tr, const Expr& eps) {
  std::vector<std::string> slots{p.bundle.base_name(0)};
  slots.insert(slots.end(), tr.state_names.begin(), tr.state_names.end());
  slots.insert(slots.end(), tr.top_names.begin(), tr.top_names.end());
  CompiledExpr f(eps, slots, p.env);
  std::vector<double> s(slots.size());
  double first = 0, worst = 0;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    s[0] = tr.t[k];
    std::copy(tr.states[k].begin(), tr.states[k].end(), s.begin() + 1);
    std::copy(tr.tops[k].begin(), tr.tops[k].end(), s.begin() + 1 + tr.states[k].size());
    double v = f(s.data());
    if (k == 0) first = v;
    worst = std::max(worst, std::abs(v - first));
  }
  return worst;
}

}  // namespace jetvar
