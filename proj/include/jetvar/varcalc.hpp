#pragma once

// First variational calculus: Euler-Lagrange expressions, momenta, the first
// variation formula, symmetries, Noether currents and Helmholtz conditions.

#include <optional>
#include <string>
#include <vector>

#include "jetvar/jet.hpp"
#include "jetvar/lift.hpp"
#include "jetvar/oracle.hpp"

namespace jetvar {

/// lambda = L dx^1 ^ ... ^ dx^n.
struct Lagrangian {
  JetBundle bundle;
  Expr density;

  int order() const { return jet_order(bundle, density); }
  BigradedForm form() const { return BigradedForm::volume(bundle) * density; }
};

/// Delta_i theta^i ^ omega.
struct SourceForm {
  std::vector<Expr> components;
};

/// An (n-1)-form eps^mu omega_mu, omega_mu = d_mu _| omega.
struct Current {
  std::vector<Expr> components;
};

struct MomentumKey {
  int field = 0;
  MultiIndex beta;
  int mu = 0;
  friend auto operator<=>(const MomentumKey&, const MomentumKey&) = default;
};

using MomentaTable = std::map<MomentumKey, Expr>;

/// All fields of the bundle.
std::vector<int> all_fields(const JetBundle& bundle);

/// E_i = sum (-1)^|a| D_a dL/dy^i_a for the listed fields (all by default).
SourceForm euler_lagrange(const Lagrangian& lambda, std::optional<std::vector<int>> fields = std::nullopt);

/// p^{b mu}_i with the symmetric weighting a_mu/|a| of dL/dy^i_a, a = b + mu.
MomentaTable momenta(const Lagrangian& lambda, std::optional<std::vector<int>> fields = std::nullopt);

/// j eta _| p = (sum D_b eta^i p^{b mu}_i) omega_mu; eta^i pairs with the
/// i-th listed field.
Current contract_momenta(const JetBundle& bundle, const MomentaTable& p, const VariationField& eta,
                         std::optional<std::vector<int>> fields = std::nullopt);

/// d_H of an (n-1)-form current, as the coefficient of omega.
Expr divergence(const JetBundle& bundle, const Current& c);

/// eta^i Delta_i.
Expr contract_source(const SourceForm& delta, const VariationField& eta);

/// j eta _| d_V lambda = sum D_a eta^i dL/dy^i_a.
Expr vertical_contraction(const Lagrangian& lambda, const VariationField& eta,
                          std::optional<std::vector<int>> fields = std::nullopt);

struct FirstVariation {
  Expr variation;   // j eta _| d_V lambda
  Expr source;      // eta _| E(lambda)
  Current boundary; // j eta _| p
  Expr residual;    // variation - source - d_H boundary
};

/// Throws Error("decomposition failure") if the residual is not zero.
FirstVariation first_variation_identity(const Lagrangian& lambda, const VariationField& eta);

/// Horizontal representative of the Lie derivative of lambda along j Xi:
/// D_s(xi^s L) + sum D_a(Xi_V)^i dL/dy^i_a.
Expr lie_derivative_density(const Lagrangian& lambda, const ProjectableVectorField& field);

struct SymmetryReport {
  enum class Path { Symbolic, Numeric };
  bool symmetric = false;
  Path decided_by = Path::Symbolic;
  Expr lie_derivative;
  IdentityReport numeric;  // filled when the numeric path ran
};

SymmetryReport is_symmetry(const Lagrangian& lambda, const ProjectableVectorField& field,
                           const SamplingOptions& options = {});

/// eps = -j lie _| p + xi _| lambda.
Current noether_current(const Lagrangian& lambda, const ProjectableVectorField& field);

/// -lie _| E(lambda) + d_H eps; zero identically for symmetries.
Expr noether_residual(const Lagrangian& lambda, const ProjectableVectorField& field, const Current& eps);

struct HelmholtzViolation {
  int i = 0;
  int j = 0;
  MultiIndex beta;
  Expr value;
};

struct HelmholtzReport {
  bool pass = true;
  std::vector<HelmholtzViolation> violations;
  std::string describe(const JetBundle& bundle) const;
};

/// d Delta_i / d y^j_b - sum_{c >= b} (-1)^|c| binom(c, b) D_{c-b} d Delta_j / d y^i_c.
HelmholtzReport helmholtz_check(const JetBundle& bundle, const SourceForm& delta);

/// Reduction modulo a system E_i = 0 (mechanics bundles): the system is
/// solved for the highest derivatives of the listed fields, and those and
/// all their total derivatives are eliminated from expressions.
class OnShell {
 public:
  OnShell(const JetBundle& bundle, const std::vector<Expr>& equations, std::optional<std::vector<int>> fields = std::nullopt);

  int order() const { return order_; }
  const JetBundle& bundle() const { return bundle_; }
  /// Solved value of y^i at derivative order k >= order().
  Expr solved(int field_position, int k) const;
  Expr reduce(const Expr& e) const;
  /// Jet coordinates of e that reduce() eliminates, with their positions.
  std::vector<std::pair<JetKey, int>> eliminated(const Expr& e) const;

 private:
  JetBundle bundle_;
  std::vector<int> fields_;
  int order_ = 0;
  mutable std::map<std::pair<int, int>, Expr> solved_;
};

/// Random-point zero test of e at on-shell points: all coordinates except
/// the solved derivatives are sampled, and those are evaluated from the
/// solution at each point.
IdentityReport on_shell_zero_test(const Expr& e, const OnShell& shell, SamplingOptions options = {});

}  // namespace jetvar
