#include "jetvar/riemann.hpp"

#include <Eigen/Dense>

namespace jetvar {

namespace {

Expr sum(std::vector<Expr> terms) { return normalize(Expr::add(std::move(terms))); }

Expr qdot(const Metric& g, int i) { return g.bundle.coord(i, MultiIndex({1})); }

}  // namespace

void Metric::validate() const {
  int n = dim();
  if (n == 0) throw Error("metric has no components");
  if (n != bundle.m()) throw Error("metric dimension does not match the coordinates");
  for (const auto& row : g)
    if (static_cast<int>(row.size()) != n) throw Error("metric is not square");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!equivalent(g[i][j], g[j][i])) throw Error("metric is not symmetric");
      if (jet_order(bundle, g[i][j]) > 0) throw Error("metric components depend on velocities");
    }
}

Metric make_metric(std::vector<std::string> coordinates, Matrix g, std::string time) {
  Metric out{JetBundle({std::move(time)}, std::move(coordinates), 1), std::move(g)};
  for (auto& row : out.g)
    for (auto& v : row) v = normalize(v);
  out.validate();
  return out;
}

Matrix inverse_metric(const Metric& g) {
  if (g.dim() > 3) throw Error("symbolic metric inverse is limited to dimension 3; use pointwise evaluation");
  try {
    return inverse(g.g);
  } catch (const Error&) {
    throw Error("singular metric");
  }
}

Christoffel christoffel(const Metric& g) {
  int n = g.dim();
  Matrix inv = inverse_metric(g);
  // dg[l][k][j] = d_j g_lk
  std::vector<Matrix> dg(n, zero_matrix(n, n));
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) dg[l][k][j] = partial(g.g[l][k], g.bundle.field(j));
  Christoffel gamma(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        std::vector<Expr> terms;
        for (int l = 0; l < n; ++l) {
          if (inv[i][l].is_zero()) continue;
          terms.push_back(inv[i][l] * (dg[l][k][j] + dg[j][l][k] - dg[j][k][l]));
        }
        gamma[i][j][k] = normalize(sum(std::move(terms)) * Expr(Rational(1, 2)));
        gamma[i][k][j] = gamma[i][j][k];
      }
  return gamma;
}

std::vector<std::vector<std::vector<double>>> christoffel_at(const Metric& g, const Env& point) {
  int n = g.dim();
  Eigen::MatrixXd m(n, n);
  std::vector<std::vector<std::vector<double>>> dg(n, std::vector<std::vector<double>>(n, std::vector<double>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m(i, j) = eval(g.g[i][j], point);
      for (int k = 0; k < n; ++k) dg[i][j][k] = eval(partial(g.g[i][j], g.bundle.field(k)), point);
    }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw Error("singular metric at the given point");
  Eigen::MatrixXd inv = lu.inverse();
  std::vector<std::vector<std::vector<double>>> out(n, std::vector<std::vector<double>>(n, std::vector<double>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0;
        for (int l = 0; l < n; ++l) s += inv(i, l) * (dg[l][k][j] + dg[j][l][k] - dg[j][k][l]);
        out[i][j][k] = 0.5 * s;
      }
  return out;
}

RiemannTensor riemann_tensor(const Metric& g) { return riemann_tensor(g, christoffel(g)); }

RiemannTensor riemann_tensor(const Metric& g, const Christoffel& gamma) {
  int n = g.dim();
  RiemannTensor r(n, std::vector<std::vector<std::vector<Expr>>>(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n))));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (l < k) {
            r[i][j][k][l] = normalize(-r[i][j][l][k]);
            continue;
          }
          if (l == k) {
            r[i][j][k][l] = Expr(0);
            continue;
          }
          std::vector<Expr> terms{partial(gamma[i][j][l], g.bundle.field(k)), -partial(gamma[i][j][k], g.bundle.field(l))};
          for (int m = 0; m < n; ++m) {
            terms.push_back(gamma[i][k][m] * gamma[m][j][l]);
            terms.push_back(-(gamma[i][l][m] * gamma[m][j][k]));
          }
          r[i][j][k][l] = sum(std::move(terms));
        }
  return r;
}

Lagrangian geodesic_energy(const Metric& g) {
  int n = g.dim();
  std::vector<Expr> terms;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!g.g[i][j].is_zero()) terms.push_back(g.g[i][j] * qdot(g, i) * qdot(g, j));
  return {g.bundle, normalize(sum(std::move(terms)) * Expr(Rational(1, 2)))};
}

std::vector<Expr> geodesic_equations(const Metric& g, const Christoffel& gamma) {
  int n = g.dim();
  std::vector<Expr> acc;
  for (int j = 0; j < n; ++j) {
    std::vector<Expr> terms{g.bundle.coord(j, MultiIndex({2}))};
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (!gamma[j][a][b].is_zero()) terms.push_back(gamma[j][a][b] * qdot(g, a) * qdot(g, b));
    acc.push_back(sum(std::move(terms)));
  }
  std::vector<Expr> out;
  for (int k = 0; k < n; ++k) {
    std::vector<Expr> terms;
    for (int j = 0; j < n; ++j) terms.push_back(-(g.g[k][j] * acc[j]));
    out.push_back(sum(std::move(terms)));
  }
  return out;
}

Metric complete_lift(const Metric& g, std::vector<std::string> fiber_names) {
  int n = g.dim();
  JetBundle product = g.bundle.adjoin(std::move(fiber_names));
  Matrix c = zero_matrix(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<Expr> terms;
      for (int k = 0; k < n; ++k) terms.push_back(partial(g.g[i][j], g.bundle.field(k)) * product.field(n + k));
      c[i][j] = sum(std::move(terms));
      c[i][n + j] = g.g[i][j];
      c[n + i][j] = g.g[i][j];
    }
  Metric out{product, c};
  for (int i = 0; i < n; ++i) out.bundle.mark_angle(i, g.bundle.is_angle(i));
  return out;
}

JacobiSystem covariant_jacobi(const Metric& g, std::vector<std::string> variation_names) {
  int n = g.dim();
  auto gamma = christoffel(g);
  auto riem = riemann_tensor(g, gamma);
  auto v = adjoin_variation(g.bundle, std::move(variation_names));
  const auto& b = v.product;
  Bindings on_shell;
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (!gamma[i][j][k].is_zero()) terms.push_back(-(gamma[i][j][k] * qdot(g, j) * qdot(g, k)));
    on_shell[b.coord_name(i, MultiIndex({2}))] = sum(std::move(terms));
  }
  std::vector<Expr> w;
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms{b.coord(n + i, MultiIndex({1}))};
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (!gamma[i][j][k].is_zero()) terms.push_back(gamma[i][j][k] * qdot(g, j) * v.eta.components[k]);
    w.push_back(sum(std::move(terms)));
  }
  JacobiSystem out{b, v.eta, {}};
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms{total_derivative(b, w[i], 0)};
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (!gamma[i][j][k].is_zero()) terms.push_back(gamma[i][j][k] * qdot(g, j) * w[k]);
        for (int l = 0; l < n; ++l)
          if (!riem[i][j][k][l].is_zero())
            terms.push_back(riem[i][j][k][l] * qdot(g, j) * v.eta.components[k] * qdot(g, l));
      }
    out.components.push_back(substitute(sum(std::move(terms)), on_shell));
  }
  return out;
}

}  // namespace jetvar
