#pragma once

// Projectable vector fields, their jet prolongations and explicit lift rules.

#include <string>
#include <vector>

#include "jetvar/jet.hpp"

namespace jetvar {

/// Xi = xi^s(x) d_s + Xi^i(x, y) d_i.
struct ProjectableVectorField {
  std::vector<Expr> base;   // xi^s
  std::vector<Expr> fiber;  // Xi^i

  static ProjectableVectorField zero(const JetBundle& bundle);
  /// Throws Error when the components violate projectability.
  void validate(const JetBundle& bundle) const;
};

/// (Xi_V)^i = Xi^i - y^i_s xi^s.
std::vector<Expr> vertical_part(const JetBundle& bundle, const ProjectableVectorField& field);

/// Coordinate components of j_s Xi: along d_s and along d/dy^i_a (|a| <= s).
struct ProlongedField {
  std::vector<Expr> base;
  std::map<JetKey, Expr> fiber;
};

ProlongedField prolong(const JetBundle& bundle, const ProjectableVectorField& field, int s);

/// u_H = xi^s D_s and u_V = D_a(Xi_V)^i d/dy^i_a up to order s.
JetVectorField split_HV(const JetBundle& bundle, const ProjectableVectorField& field, int s);

/// Generalized Lie derivative components y^i_s xi^s - Xi^i on the jet space.
std::vector<Expr> lie_components(const JetBundle& bundle, const ProjectableVectorField& field);

/// The same, evaluated along the section y^i = gamma^i(x).
std::vector<Expr> lie_derivative(const JetBundle& bundle, const ProjectableVectorField& field,
                                 const std::map<int, Expr>& section);

/// Lie bracket of projectable fields as vector fields on Y.
ProjectableVectorField bracket(const JetBundle& bundle, const ProjectableVectorField& a,
                               const ProjectableVectorField& b);

/// Lie bracket of prolonged coordinate fields on J_s Y.
ProlongedField bracket(const JetBundle& bundle, const ProlongedField& a, const ProlongedField& b);

/// Template producing fiber components from the components of a base field
/// xi. The template refers to xi^s as the opaque function `xi_names[s]`
/// of the base coordinates, so derivatives of xi appear as opaque
/// derivative atoms. The order pair (r, k) is informational; k bounds the
/// derivatives of xi the template may use.
struct LiftRule {
  std::string name;
  std::vector<std::string> xi_names;
  std::vector<Expr> fiber;  // one template per field component
  int r = 0;
  int k = 1;
};

/// Substitutes the components of xi into the rule.
/// Throws Error("lift order mismatch") when the template needs derivatives
/// beyond the declared order or xi has the wrong number of components.
ProjectableVectorField apply_lift(const JetBundle& bundle, const LiftRule& rule, const std::vector<Expr>& xi);

/// Opaque atom standing for xi^s in rule templates.
Expr xi_atom(const JetBundle& bundle, const LiftRule& rule, int sigma, const MultiIndex& derivative);

/// Tangent lift on fields u^1..u^n (the first n fields): Xi^i = u^j d_j xi^i.
LiftRule tangent_rule(const JetBundle& bundle);
/// Cotangent lift on fields p_1..p_n: Xi_i = -p_j d_i xi^j.
LiftRule cotangent_rule(const JetBundle& bundle);
/// Symmetric rank-2 covariant tensor with fields ordered g_11, g_12, ...,
/// g_1n, g_22, ...: Xi_ij = -(g_kj d_i xi^k + g_ik d_j xi^k).
LiftRule covariant2_rule(const JetBundle& bundle);

/// A variation field: vertical components eta^i as functions on a jet
/// space, either adjoined fiber coordinates or bound to Xi_V of a lift.
struct VariationField {
  std::vector<Expr> components;
};

/// The product bundle Y x_X V together with eta^i as its new fields.
struct AdjoinedVariation {
  JetBundle product;
  VariationField eta;
};

AdjoinedVariation adjoin_variation(const JetBundle& bundle, std::vector<std::string> names = {});

/// eta = Xi_V = -(lie components).
VariationField bind_variation(const JetBundle& bundle, const ProjectableVectorField& field);

/// Prolonged component D_a eta^i.
Expr prolonged_component(const JetBundle& bundle, const VariationField& eta, int field, const MultiIndex& alpha);

/// eta as a vertical field on `bundle` up to order s (only the first
/// eta.components.size() fields are moved).
JetVectorField as_vertical_field(const JetBundle& bundle, const VariationField& eta, int s);

/// Tangent-field convenience: eta^i = xi^i - y^i_t xi^0 on mechanics
/// bundles, with xi = (xi^0, xi^1..xi^m) a vector field on R x Q.
VariationField tangent_variation(const JetBundle& bundle, const Expr& xi0, const std::vector<Expr>& xi);

}  // namespace jetvar
