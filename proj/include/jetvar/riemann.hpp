#pragma once

// Riemannian metrics on a configuration space Q, read as fields over time:
// Christoffel symbols, curvature, the energy Lagrangian, the complete lift
// to TQ and the covariant Jacobi equation.

#include "jetvar/matrix.hpp"
#include "jetvar/secondvar.hpp"

namespace jetvar {

/// g_ij(q) on the mechanics bundle R x Q -> R with fields q^i.
struct Metric {
  JetBundle bundle;
  Matrix g;

  int dim() const { return static_cast<int>(g.size()); }
  /// Checks shape, symmetry and that g is free of derivatives.
  void validate() const;
};

Metric make_metric(std::vector<std::string> coordinates, Matrix g, std::string time = "t");

using Christoffel = std::vector<std::vector<std::vector<Expr>>>;            // [i][j][k]
using RiemannTensor = std::vector<std::vector<std::vector<std::vector<Expr>>>>;  // [i][j][k][l]

/// Symbolic for dim <= 3; throws Error beyond (use christoffel_at).
Matrix inverse_metric(const Metric& g);
Christoffel christoffel(const Metric& g);
/// Pointwise values with a numeric inverse, for any dimension.
std::vector<std::vector<std::vector<double>>> christoffel_at(const Metric& g, const Env& point);

RiemannTensor riemann_tensor(const Metric& g);
RiemannTensor riemann_tensor(const Metric& g, const Christoffel& gamma);

/// 1/2 g_ij q^i_t q^j_t.
Lagrangian geodesic_energy(const Metric& g);

/// -g_kj (q^j_tt + Gamma^j_ab q^a_t q^b_t).
std::vector<Expr> geodesic_equations(const Metric& g, const Christoffel& gamma);

/// The complete lift on the product bundle with fields (q, u), where u are
/// the adjoined variation fields: qq-block (d_k g_ij) u^k, qu-block g_ij,
/// uu-block 0.
Metric complete_lift(const Metric& g, std::vector<std::string> fiber_names = {});

/// Components C^i of nabla^2 eta + R(eta, qdot) qdot on the product bundle
/// with q_tt eliminated by the geodesic equation.
JacobiSystem covariant_jacobi(const Metric& g, std::vector<std::string> variation_names = {});

}  // namespace jetvar
