#include <Eigen/Dense>
#include <cmath>

#include "kccjet/geometry.hpp"

namespace kccjet::geometry {

using expr::VarKind;

namespace {

Expr var_x(int i) { return Expr(VarId::x(i + 1)); }
Expr var_y(int i) { return Expr(VarId::y(i + 1)); }

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

CoordinateChange::CoordinateChange(int n, Expr t_fwd, InverseMap t_inv, std::vector<Expr> x_fwd, InverseMap x_inv)
    : n_(n), t_fwd_(std::move(t_fwd)), t_inv_(std::move(t_inv)), x_fwd_(std::move(x_fwd)), x_inv_(std::move(x_inv)) {
  if (n_ < 1) throw std::invalid_argument("coordinate change dimension must be >= 1");
  if (static_cast<int>(x_fwd_.size()) != n_)
    throw std::invalid_argument("coordinate change needs n spatial forward maps");
  if (expr::depends_on(t_fwd_, VarKind::Spatial) || expr::depends_on(t_fwd_, VarKind::Velocity))
    throw std::invalid_argument("time change must depend on t only");
  for (const auto& e : x_fwd_)
    if (expr::depends_on(e, VarKind::Time) || expr::depends_on(e, VarKind::Velocity) || max_index(e) > n_)
      throw std::invalid_argument("spatial change must depend on x1..xn only");
  if (t_inv_.kind == InverseMap::Kind::Explicit && t_inv_.exprs.size() != 1)
    throw std::invalid_argument("time inverse needs exactly one expression");
  if (x_inv_.kind == InverseMap::Kind::Explicit && static_cast<int>(x_inv_.exprs.size()) != n_)
    throw std::invalid_argument("spatial inverse needs n expressions");

  dtnew_ = expr::diff(t_fwd_, VarId::time());
  s_ = expr::simplify(Expr(1.0) / dtnew_);
  jac_.assign(n_, std::vector<Expr>(n_));
  for (int a = 0; a < n_; ++a)
    for (int i = 0; i < n_; ++i) jac_[a][i] = expr::diff(x_fwd_[a], VarId::x(i + 1));
  jinv_ = symbolic_inverse(jac_);
  for (int r = 0; r < n_; ++r) {
    Expr s = 0.0;
    for (int k = 0; k < n_; ++k) s = s + jac_[r][k] * var_y(k);
    ynew_.push_back(expr::simplify(s * s_));
  }

  if (t_inv_.kind == InverseMap::Kind::Newton) {
    auto map = std::make_shared<expr::ImplicitInverse>();
    map->kind = VarKind::Time;
    map->forward = {t_fwd_};
    map->jacobian_inverse = {{s_}};
    t_newton_ = std::move(map);
  }
  if (x_inv_.kind == InverseMap::Kind::Newton) {
    auto map = std::make_shared<expr::ImplicitInverse>();
    map->kind = VarKind::Spatial;
    map->forward = x_fwd_;
    map->jacobian_inverse = jinv_;
    x_newton_ = std::move(map);
  }
}

CoordinateChange CoordinateChange::identity(int n) {
  std::vector<Expr> x;
  for (int i = 0; i < n; ++i) x.push_back(var_x(i));
  return CoordinateChange(n, Expr(VarId::time()), InverseMap::explicit_map({Expr(VarId::time())}), x,
                          InverseMap::explicit_map(x));
}

bool CoordinateChange::invertible() const {
  return t_inv_.kind != InverseMap::Kind::Missing && x_inv_.kind != InverseMap::Kind::Missing;
}

Expr CoordinateChange::old_time() const {
  switch (t_inv_.kind) {
    case InverseMap::Kind::Explicit:
      return t_inv_.exprs[0];
    case InverseMap::Kind::Newton:
      return Expr::inverse(t_newton_, 0, {Expr(VarId::time())});
    case InverseMap::Kind::Missing:
      break;
  }
  throw std::logic_error("coordinate change has no inverse time map");
}

std::vector<Expr> CoordinateChange::old_space() const {
  switch (x_inv_.kind) {
    case InverseMap::Kind::Explicit:
      return x_inv_.exprs;
    case InverseMap::Kind::Newton: {
      std::vector<Expr> args;
      for (int i = 0; i < n_; ++i) args.push_back(var_x(i));
      std::vector<Expr> out;
      for (int i = 0; i < n_; ++i) out.push_back(Expr::inverse(x_newton_, i, args));
      return out;
    }
    case InverseMap::Kind::Missing:
      break;
  }
  throw std::logic_error("coordinate change has no inverse spatial map");
}

ChangeJacobians jacobians_at(const CoordinateChange& c, const JetPoint& p) {
  const int n = c.dim();
  ChangeJacobians out;
  out.dtnew_dt = expr::eval(c.dt_new_dt(), p);
  if (std::abs(out.dtnew_dt) < 1e-300 || !std::isfinite(out.dtnew_dt))
    throw SingularError("time change has vanishing derivative");
  Eigen::MatrixXd J(n, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) J(a, i) = expr::eval(c.jacobian()[a][i], p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
  if (!lu.isInvertible() || std::abs(J.determinant()) < 1e-13 * std::pow(std::max(1.0, J.norm()), n))
    throw SingularError("spatial Jacobian is singular");
  const Eigen::MatrixXd Jinv = lu.inverse();
  out.J.assign(n, std::vector<double>(n));
  out.Jinv.assign(n, std::vector<double>(n));
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) {
      out.J[a][i] = J(a, i);
      out.Jinv[a][i] = Jinv(a, i);
    }
  return out;
}

void CoordinateChange::validate(const std::vector<JetPoint>& samples, double tol) const {
  for (const auto& p : samples) {
    (void)jacobians_at(*this, p);
    const JetPoint q = transform_jetpoint(p, *this);
    if (t_inv_.kind == InverseMap::Kind::Explicit) {
      const double back = expr::eval(t_inv_.exprs[0], q);
      if (!close(back, p.t, tol)) throw expr::EvalError("time inverse does not invert the forward map");
    }
    if (x_inv_.kind == InverseMap::Kind::Explicit) {
      for (int i = 0; i < n_; ++i) {
        const double back = expr::eval(x_inv_.exprs[i], q);
        if (!close(back, p.x[i], tol))
          throw expr::EvalError("spatial inverse does not invert the forward map (component " +
                                std::to_string(i + 1) + ")");
      }
    }
  }
}

JetPoint transform_jetpoint(const JetPoint& p, const CoordinateChange& c) {
  const int n = c.dim();
  const ChangeJacobians jac = jacobians_at(c, p);
  JetPoint q;
  q.t = expr::eval(c.t_forward(), p);
  q.x.resize(n);
  q.y.assign(n, 0.0);
  for (int a = 0; a < n; ++a) {
    q.x[a] = expr::eval(c.x_forward()[a], p);
    for (int k = 0; k < n; ++k) q.y[a] += jac.J[a][k] * p.y[k];
    q.y[a] /= jac.dtnew_dt;
  }
  return q;
}

std::vector<std::size_t> dtensor_shape(const std::vector<IndexKind>& signature, int n) {
  std::vector<std::size_t> shape;
  for (IndexKind k : signature)
    shape.push_back(k == IndexKind::TimeUp || k == IndexKind::TimeDown ? 1 : static_cast<std::size_t>(n));
  return shape;
}

DTensor::DTensor(std::vector<IndexKind> sig, ExprTensor comps, int n)
    : signature(std::move(sig)), components(std::move(comps)) {
  if (components.shape() != dtensor_shape(signature, n))
    throw std::invalid_argument("d-tensor components do not match the signature");
}

NumTensor transform_components(const NumTensor& values, const std::vector<IndexKind>& signature,
                               const ChangeJacobians& jac, int n) {
  if (values.shape() != dtensor_shape(signature, n))
    throw std::invalid_argument("d-tensor components do not match the signature");
  NumTensor cur = values;
  const double s = 1.0 / jac.dtnew_dt;
  for (std::size_t axis = 0; axis < signature.size(); ++axis) {
    const IndexKind kind = signature[axis];
    if (kind == IndexKind::TimeUp || kind == IndexKind::TimeDown) {
      const double f = kind == IndexKind::TimeUp ? jac.dtnew_dt : s;
      for (double& v : cur.data()) v *= f;
      continue;
    }
    // out[.. a ..] = sum_i M[a][i] in[.. i ..]
    std::vector<std::vector<double>> M(n, std::vector<double>(n));
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) {
        switch (kind) {
          case IndexKind::SpatialUp: M[a][i] = jac.J[a][i]; break;
          case IndexKind::SpatialDown: M[a][i] = jac.Jinv[i][a]; break;
          case IndexKind::JetUp: M[a][i] = jac.J[a][i] * s; break;
          case IndexKind::JetDown: M[a][i] = jac.Jinv[i][a] * jac.dtnew_dt; break;
          default: break;
        }
      }
    NumTensor next(cur.shape());
    for (std::size_t k = 0; k < next.size(); ++k) {
      auto idx = next.unravel(k);
      const std::size_t a = idx[axis];
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        idx[axis] = static_cast<std::size_t>(i);
        sum += M[a][i] * cur.at(idx);
      }
      next.data()[k] = sum;
    }
    cur = std::move(next);
  }
  return cur;
}

NumTensor transform_dtensor(const DTensor& T, const CoordinateChange& c, const JetPoint& p) {
  return transform_components(evaluate(T.components, p), T.signature, jacobians_at(c, p), c.dim());
}

Expr to_new_chart(const Expr& e, const CoordinateChange& c) {
  const int n = c.dim();
  const Expr t_old = c.old_time();
  const std::vector<Expr> x_old = c.old_space();
  auto old_lookup = [&](VarId v) -> const Expr* {
    if (v.kind == VarKind::Time) return &t_old;
    if (v.kind == VarKind::Spatial) return &x_old[v.index - 1];
    return nullptr;
  };
  // y = (dt~/dt) J^-1 y~ evaluated at the old point
  std::vector<Expr> y_old;
  const Expr rate = expr::substitute(c.dt_new_dt(), old_lookup);
  for (int i = 0; i < n; ++i) {
    Expr s = 0.0;
    for (int a = 0; a < n; ++a) s = s + expr::substitute(c.jacobian_inverse()[i][a], old_lookup) * var_y(a);
    y_old.push_back(rate * s);
  }
  auto lookup = [&](VarId v) -> const Expr* {
    if (v.kind == VarKind::Velocity) return &y_old[v.index - 1];
    return old_lookup(v);
  };
  return expr::simplify(expr::substitute(e, lookup));
}

SodeModel transform_sode(const SodeModel& m, const CoordinateChange& c) {
  if (m.n != c.dim()) throw std::invalid_argument("model and coordinate change dimensions differ");
  if (!c.invertible()) throw std::invalid_argument("transform_sode needs inverse maps for the coordinate change");
  const int n = m.n;
  const Expr& s = c.dt_dt_new();
  const auto& J = c.jacobian();
  const auto& Jinv = c.jacobian_inverse();
  const auto& Y = c.new_velocity();
  std::vector<Expr> F_new;
  for (int r = 0; r < n; ++r) {
    Expr first = 0.0;
    for (int j = 0; j < n; ++j) first = first + m.F[j] * J[r][j];
    first = first * s * s;
    Expr second = s * expr::diff(Y[r], VarId::time());
    Expr third = 0.0;
    for (int mm = 0; mm < n; ++mm) {
      Expr dY = expr::diff(Y[r], VarId::x(mm + 1));
      if (dY.is_const(0.0)) continue;
      for (int j = 0; j < n; ++j) third = third + Jinv[mm][j] * dY * Y[j];
    }
    F_new.push_back(to_new_chart(first - second - third, c));
  }
  return SodeModel(n, transform_temporal_metric(m.h, c), std::move(F_new));
}

TemporalMetric transform_temporal_metric(const TemporalMetric& h, const CoordinateChange& c) {
  const Expr& s = c.dt_dt_new();
  return TemporalMetric(to_new_chart(h.h11 * s * s, c));
}

SpatialMetric transform_spatial_metric(const SpatialMetric& phi, const CoordinateChange& c) {
  const int n = phi.n;
  const auto& Jinv = c.jacobian_inverse();
  std::vector<std::vector<Expr>> out(n, std::vector<Expr>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Expr s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (phi.phi[i][j].is_const(0.0)) continue;
          s = s + Jinv[i][a] * Jinv[j][b] * phi.phi[i][j];
        }
      out[a][b] = to_new_chart(s, c);
    }
  return SpatialMetric(std::move(out));
}

DTensor make_liouville(int n) {
  ExprTensor comps({static_cast<std::size_t>(n)});
  for (int i = 0; i < n; ++i) comps(i) = var_y(i);
  return DTensor({IndexKind::JetUp}, std::move(comps), n);
}

DTensor make_normalization(const TemporalMetric& h, int n) {
  ExprTensor comps({static_cast<std::size_t>(n), 1, static_cast<std::size_t>(n)});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) comps(i, 0, j) = i == j ? h.h11 : Expr(0.0);
  return DTensor({IndexKind::JetUp, IndexKind::TimeDown, IndexKind::SpatialDown}, std::move(comps), n);
}

}  // namespace kccjet::geometry
