#pragma once

#include <cstdint>
#include <string>

#include "jetvar/expr.hpp"
#include "jetvar/jet.hpp"
#include "jetvar/riemann.hpp"
#include "jetvar/syntax.hpp"

namespace jetvar::testing {

/// Parses with the bundle's coordinates, any other identifier becoming a
/// parameter, and V, W, f (one slot) and g, A, B, C (two slots) as opaque functions.
Expr parse(const JetBundle& bundle, const std::string& text);

/// parse followed by normalize.
Expr N(const JetBundle& bundle, const std::string& text);

JetBundle mechanics(const std::string& field = "y");

/// Unit sphere metric diag(1, sin(th)^2) on fields th, ph (th an angle).
Metric sphere();
/// 2D metric with opaque components A, B, C of (q1, q2).
Metric generic_metric();
/// 2D polynomial metric, positive definite on [-1, 1]^2.
Metric random_polynomial_metric(std::uint64_t seed);

}  // namespace jetvar::testing
