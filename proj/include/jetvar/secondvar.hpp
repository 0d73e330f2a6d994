#pragma once

// Second variation: formal variations, the deformed Lagrangian, the Jacobi
// system, Bianchi morphism and the strong current.

#include "jetvar/varcalc.hpp"

namespace jetvar {

/// Linear differential operator J_i(eta) on the product bundle.
struct JacobiSystem {
  JetBundle bundle;
  VariationField eta;
  std::vector<Expr> components;
};

/// omega = eta^i E_i and its integrated form eta-order <= s, with
/// raw = integrated - d_H(discarded).
struct DeformedLagrangian {
  Expr raw;
  Expr integrated;
  Current discarded;
};

/// beta = EL of omega in the original fields, with
/// eta^i J_i = eta^i beta_i + d_H(remainder).
struct BianchiForm {
  std::vector<Expr> beta;
  Current remainder;
};

/// The variation field eta d/dy on the product bundle.
ProjectableVectorField adjoined_field(const AdjoinedVariation& v, int original_fields);

/// i-th formal variation (i = 1, 2) of a Lagrangian along j Xi, as the
/// horizontal density representative.
Expr variational_derivative(const Lagrangian& lambda, const ProjectableVectorField& field, int i);

/// i-th formal variation of a source form: D_Delta(Q) + D_Q^*(Delta) with
/// Q = Xi_V, iterated. Only the listed components of Delta (the first ones)
/// are varied.
SourceForm variational_derivative(const JetBundle& bundle, const SourceForm& delta,
                                  const ProjectableVectorField& field, int i);

/// eta _| E(eta _| E(lambda)) with the inner EL in the original fields.
Expr second_variation(const Lagrangian& lambda, const AdjoinedVariation& v);

/// Works on any bundle containing the fields of lambda first; eta may be
/// adjoined or bound.
DeformedLagrangian deform(const Lagrangian& lambda, const JetBundle& bundle, const VariationField& eta);
DeformedLagrangian deform(const Lagrangian& lambda, const AdjoinedVariation& v);

/// J_i(eta) = sum dE_i/dy^j_a D_a eta^j.
JacobiSystem jacobi(const Lagrangian& lambda, const AdjoinedVariation& v);
JacobiSystem jacobi(const Lagrangian& lambda);

BianchiForm bianchi(const Lagrangian& lambda, const AdjoinedVariation& v);

/// H = j eta _| p(omega), momenta of omega in the original fields.
Current strong_current(const Lagrangian& lambda, const AdjoinedVariation& v);

struct KernelReport {
  bool in_kernel = false;
  bool symbolic = false;         // decided by normalization alone
  std::vector<Expr> pulled_back; // J_i along the binding
  IdentityReport numeric;        // worst component when sampled
};

/// J_i along the section given for all fields of the product bundle.
KernelReport jacobi_kernel_test(const JacobiSystem& system, const std::map<int, Expr>& section,
                                const SamplingOptions& options = {});

/// Pullback of arbitrary components along a section, decided the same way.
KernelReport vanishes_along(const JetBundle& bundle, const std::vector<Expr>& components,
                            const std::map<int, Expr>& section, const SamplingOptions& options = {});

}  // namespace jetvar
