#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "kccjet/geometry.hpp"

namespace kccjet::geometry {

using expr::VarKind;

int max_index(const Expr& e) {
  if (e.op() == expr::Op::Var) return e.var_id().index;
  int m = 0;
  for (const auto& a : e.args()) m = std::max(m, max_index(a));
  return m;
}

TemporalMetric::TemporalMetric(Expr h) : h11(std::move(h)) {
  if (expr::depends_on(h11, VarKind::Spatial) || expr::depends_on(h11, VarKind::Velocity))
    throw std::invalid_argument("temporal metric h11 must depend on t only");
}

void TemporalMetric::check_at(double t) const {
  expr::Env env{t, {}, {}};
  const double v = expr::eval(h11, env);
  if (!(v > 0.0)) throw expr::EvalError("temporal metric h11 not positive at t=" + std::to_string(t));
}

SpatialMetric::SpatialMetric(std::vector<std::vector<Expr>> components)
    : n(static_cast<int>(components.size())), phi(std::move(components)) {
  if (n == 0) throw std::invalid_argument("spatial metric must have dimension >= 1");
  for (const auto& row : phi) {
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("spatial metric must be square");
    for (const auto& e : row) {
      if (expr::depends_on(e, VarKind::Time) || expr::depends_on(e, VarKind::Velocity))
        throw std::invalid_argument("spatial metric must depend on x only");
      if (max_index(e) > n) throw std::invalid_argument("spatial metric entry uses an index beyond n");
    }
  }
}

SpatialMetric SpatialMetric::identity(int n) {
  std::vector<std::vector<Expr>> m(n, std::vector<Expr>(n, Expr(0.0)));
  for (int i = 0; i < n; ++i) m[i][i] = 1.0;
  return SpatialMetric(std::move(m));
}

void SpatialMetric::check_at(const std::vector<double>& x) const {
  expr::Env env{0.0, x, std::vector<double>(x.size(), 0.0)};
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = expr::eval(phi[i][j], env);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(g(i, j) - g(j, i)) > 1e-12 * std::max(1.0, std::abs(g(i, j))))
        throw expr::EvalError("spatial metric is not symmetric");
  for (int k = 1; k <= n; ++k)
    if (!(g.topLeftCorner(k, k).determinant() > 0.0))
      throw expr::EvalError("spatial metric is not positive definite");
}

LinearConnection::LinearConnection(ExprTensor components)
    : n(static_cast<int>(components.shape().empty() ? 0 : components.shape()[0])), gamma(std::move(components)) {
  if (gamma.shape() != std::vector<std::size_t>(3, static_cast<std::size_t>(n)) || n == 0)
    throw std::invalid_argument("linear connection must have shape (n, n, n)");
  for (const auto& e : gamma.data()) {
    if (expr::depends_on(e, VarKind::Time) || expr::depends_on(e, VarKind::Velocity))
      throw std::invalid_argument("linear connection must depend on x only");
    if (max_index(e) > n) throw std::invalid_argument("connection entry uses an index beyond n");
  }
}

void LinearConnection::check_symmetric_at(const std::vector<double>& x, double tol) const {
  expr::Env env{0.0, x, std::vector<double>(x.size(), 0.0)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < j; ++k) {
        const double a = expr::eval(gamma(i, j, k), env);
        const double b = expr::eval(gamma(i, k, j), env);
        if (std::abs(a - b) > tol * std::max(1.0, std::abs(a)))
          throw expr::EvalError("connection is not symmetric in its lower indices");
      }
}

std::vector<std::vector<Expr>> symbolic_inverse(const std::vector<std::vector<Expr>>& m) {
  const std::size_t n = m.size();
  auto minor = [&](const std::vector<std::vector<Expr>>& a, std::size_t row, std::size_t col) {
    std::vector<std::vector<Expr>> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == row) continue;
      std::vector<Expr> r;
      for (std::size_t j = 0; j < a.size(); ++j)
        if (j != col) r.push_back(a[i][j]);
      out.push_back(std::move(r));
    }
    return out;
  };
  std::function<Expr(const std::vector<std::vector<Expr>>&)> det = [&](const std::vector<std::vector<Expr>>& a) {
    if (a.size() == 1) return a[0][0];
    if (a.size() == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    Expr d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      Expr term = a[0][j] * det(minor(a, 0, j));
      d = j % 2 == 0 ? d + term : d - term;
    }
    return d;
  };
  const Expr d = expr::simplify(det(m));
  std::vector<std::vector<Expr>> inv(n, std::vector<Expr>(n));
  if (n == 1) {
    inv[0][0] = expr::simplify(Expr(1.0) / d);
    return inv;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Expr cof = det(minor(m, j, i));
      if ((i + j) % 2 == 1) cof = -cof;
      inv[i][j] = expr::simplify(cof / d);
    }
  return inv;
}

Expr christoffel_temporal(const TemporalMetric& h) {
  return expr::simplify(expr::diff(h.h11, VarId::time()) / (Expr(2.0) * h.h11));
}

ExprTensor christoffel_spatial(const SpatialMetric& phi) {
  const int n = phi.n;
  if (n > 3) throw std::domain_error("symbolic Christoffel symbols are limited to n <= 3");
  const auto inv = symbolic_inverse(phi.phi);
  // dphi[a][b][c] = d phi_ab / d x^c
  std::vector<std::vector<std::vector<Expr>>> dphi(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) dphi[a][b][c] = expr::diff(phi.phi[a][b], VarId::x(c + 1));
  ExprTensor gamma = ExprTensor::cube(3, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        Expr sum = 0.0;
        for (int m = 0; m < n; ++m) {
          Expr bracket = dphi[j][m][k] + dphi[k][m][j] - dphi[j][k][m];
          if (bracket.is_const(0.0) || inv[i][m].is_const(0.0)) continue;
          sum = sum + inv[i][m] * bracket;
        }
        Expr g = expr::simplify(Expr(0.5) * sum);
        gamma(i, j, k) = g;
        gamma(i, k, j) = g;
      }
  return gamma;
}

NumTensor christoffel_spatial_at(const SpatialMetric& phi, const std::vector<double>& x) {
  const int n = phi.n;
  expr::Env env{0.0, x, std::vector<double>(x.size(), 0.0)};
  Eigen::MatrixXd g(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g(a, b) = expr::eval(phi.phi[a][b], env);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible()) throw SingularError("spatial metric is singular");
  const Eigen::MatrixXd ginv = lu.inverse();
  std::vector<double> dphi(static_cast<std::size_t>(n) * n * n);
  auto at = [&](int a, int b, int c) -> double& { return dphi[(a * n + b) * n + c]; };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) at(a, b, c) = expr::eval(expr::diff(phi.phi[a][b], VarId::x(c + 1)), env);
  NumTensor gamma = NumTensor::cube(3, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += ginv(i, m) * (at(j, m, k) + at(k, m, j) - at(j, k, m));
        gamma(i, j, k) = 0.5 * s;
      }
  return gamma;
}

ExprTensor riemann_curvature(const ExprTensor& gamma) {
  const int n = static_cast<int>(gamma.shape().at(0));
  ExprTensor R = ExprTensor::cube(4, n);
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int j = 0; j < n; ++j) {
          Expr e = expr::diff(gamma(i, p, q), VarId::x(j + 1)) - expr::diff(gamma(i, p, j), VarId::x(q + 1));
          for (int r = 0; r < n; ++r) e = e + gamma(r, p, q) * gamma(i, r, j) - gamma(r, p, j) * gamma(i, r, q);
          R(i, p, q, j) = expr::simplify(e);
        }
  return R;
}

TemporalSemispray canonical_temporal_semispray(const TemporalMetric& h, int n) {
  const Expr H = christoffel_temporal(h);
  TemporalSemispray out;
  for (int j = 1; j <= n; ++j) out.H.push_back(expr::simplify(Expr(-0.5) * H * Expr(VarId::y(j))));
  return out;
}

SpatialSemispray canonical_spatial_semispray(const SpatialMetric& phi) {
  const ExprTensor gamma = christoffel_spatial(phi);
  SpatialSemispray out;
  for (int j = 0; j < phi.n; ++j) {
    Expr s = 0.0;
    for (int k = 0; k < phi.n; ++k)
      for (int l = 0; l < phi.n; ++l) s = s + gamma(j, k, l) * Expr(VarId::y(k + 1)) * Expr(VarId::y(l + 1));
    out.G.push_back(expr::simplify(Expr(0.5) * s));
  }
  return out;
}

NonlinearConnection canonical_nonlinear_connection(const TemporalMetric& h, const SpatialMetric& phi) {
  const int n = phi.n;
  const Expr H = christoffel_temporal(h);
  const ExprTensor gamma = christoffel_spatial(phi);
  NonlinearConnection out;
  out.N = ExprTensor::cube(2, n);
  for (int j = 0; j < n; ++j) {
    out.M.push_back(expr::simplify(-H * Expr(VarId::y(j + 1))));
    for (int i = 0; i < n; ++i) {
      Expr s = 0.0;
      for (int m = 0; m < n; ++m) s = s + gamma(j, i, m) * Expr(VarId::y(m + 1));
      out.N(j, i) = expr::simplify(s);
    }
  }
  return out;
}

namespace {

std::vector<Expr> quadratic_minus_damping(const ExprTensor& gamma, const Expr& H, int n) {
  std::vector<Expr> F;
  for (int i = 0; i < n; ++i) {
    Expr s = -H * Expr(VarId::y(i + 1));
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s = s + gamma(i, j, k) * Expr(VarId::y(j + 1)) * Expr(VarId::y(k + 1));
    F.push_back(expr::simplify(s));
  }
  return F;
}

}  // namespace

SodeModel sode_from_harmonic_curves(const TemporalMetric& h, const SpatialMetric& phi) {
  auto F = quadratic_minus_damping(christoffel_spatial(phi), christoffel_temporal(h), phi.n);
  return SodeModel(phi.n, h, std::move(F), provenance::Harmonic{h, phi});
}

SodeModel sode_from_vectorfield(const std::vector<Expr>& X, const TemporalMetric& h) {
  const int n = static_cast<int>(X.size());
  std::vector<Expr> F;
  for (int i = 0; i < n; ++i) {
    if (expr::depends_on(X[i], VarKind::Velocity))
      throw std::invalid_argument("vector field component " + std::to_string(i + 1) + " depends on y");
    Expr s = -expr::diff(X[i], VarId::time());
    for (int m = 1; m <= n; ++m) s = s - expr::diff(X[i], VarId::x(m)) * Expr(VarId::y(m));
    F.push_back(expr::simplify(s));
  }
  return SodeModel(n, h, std::move(F), provenance::VectorField{X});
}

SodeModel sode_from_connection(const LinearConnection& gamma, const TemporalMetric& h) {
  auto F = quadratic_minus_damping(gamma.gamma, christoffel_temporal(h), gamma.n);
  return SodeModel(gamma.n, h, std::move(F), provenance::Connection{gamma});
}

std::string provenance_name(const Provenance& p) {
  struct {
    std::string operator()(const provenance::Explicit&) const { return "explicit"; }
    std::string operator()(const provenance::Harmonic&) const { return "harmonic"; }
    std::string operator()(const provenance::VectorField&) const { return "vectorfield"; }
    std::string operator()(const provenance::Connection&) const { return "connection"; }
  } visitor;
  return std::visit(visitor, p);
}

SodeModel::SodeModel(int dim, TemporalMetric metric, std::vector<Expr> forces, Provenance origin)
    : n(dim), h(std::move(metric)), F(std::move(forces)), provenance(std::move(origin)) {
  if (n < 1) throw std::invalid_argument("model dimension must be >= 1");
  if (static_cast<int>(F.size()) != n)
    throw std::invalid_argument("model needs exactly n = " + std::to_string(n) + " force components");
  for (std::size_t i = 0; i < F.size(); ++i)
    if (max_index(F[i]) > n)
      throw std::invalid_argument("force component " + std::to_string(i + 1) + " uses an index beyond n");
}

}  // namespace kccjet::geometry
