#include <algorithm>
#include <cctype>

#include "kccjet/kcc.hpp"

namespace kccjet::kcc {

using expr::VarId;
using geometry::IndexKind;

namespace {

Expr y(int i) { return Expr(VarId::y(i + 1)); }

std::size_t dim(int n) { return static_cast<std::size_t>(n); }

// dF^i/dy^j as [i][j]
std::vector<std::vector<Expr>> velocity_jacobian(const SodeModel& m) {
  std::vector<std::vector<Expr>> J(m.n, std::vector<Expr>(m.n));
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) J[i][j] = expr::diff(m.F[i], VarId::y(j + 1));
  return J;
}

}  // namespace

std::string_view invariant_name(Invariant which) {
  switch (which) {
    case Invariant::Epsilon: return "epsilon";
    case Invariant::P: return "P";
    case Invariant::R3: return "R3";
    case Invariant::B4: return "B4";
    case Invariant::D5: return "D5";
  }
  return "?";
}

std::optional<Invariant> parse_invariant(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Invariant k : kAllInvariants) {
    std::string cand(invariant_name(k));
    std::transform(cand.begin(), cand.end(), cand.begin(), [](unsigned char c) { return std::tolower(c); });
    if (cand == lower) return k;
  }
  return std::nullopt;
}

std::vector<IndexKind> invariant_signature(Invariant which) {
  switch (which) {
    case Invariant::Epsilon:
      return {IndexKind::JetUp, IndexKind::TimeDown};
    case Invariant::P:
      return {IndexKind::SpatialUp, IndexKind::SpatialDown, IndexKind::TimeDown, IndexKind::TimeDown};
    case Invariant::R3:
      return {IndexKind::SpatialUp, IndexKind::SpatialDown, IndexKind::SpatialDown, IndexKind::TimeDown};
    case Invariant::B4:
      return {IndexKind::SpatialUp, IndexKind::SpatialDown, IndexKind::SpatialDown, IndexKind::SpatialDown};
    case Invariant::D5:
      return {IndexKind::SpatialUp, IndexKind::TimeUp, IndexKind::SpatialDown, IndexKind::SpatialDown,
              IndexKind::SpatialDown};
  }
  return {};
}

ExprTensor invariant_components(const InvariantSet& s, Invariant which) {
  switch (which) {
    case Invariant::Epsilon: {
      ExprTensor t({s.epsilon.size()});
      t.data() = s.epsilon;
      return t;
    }
    case Invariant::P: return s.P;
    case Invariant::R3: return s.R3;
    case Invariant::B4: return s.B4;
    case Invariant::D5: return s.D5;
  }
  return {};
}

geometry::DTensor as_dtensor(const InvariantSet& s, Invariant which, int n) {
  const auto sig = invariant_signature(which);
  // unit axes leave the row-major order untouched
  ExprTensor comps(geometry::dtensor_shape(sig, n));
  comps.data() = invariant_components(s, which).data();
  return geometry::DTensor(sig, std::move(comps), n);
}

SemisprayDecomposition decompose(const SodeModel& m) {
  SemisprayDecomposition d;
  d.H = geometry::christoffel_temporal(m.h);
  for (int i = 0; i < m.n; ++i) {
    d.G.push_back(expr::simplify(Expr(0.5) * m.F[i] + Expr(0.5) * d.H * y(i)));
    d.M.push_back(expr::simplify(-d.H * y(i)));
  }
  d.N = semispray_to_connection(d.G);
  return d;
}

ExprTensor semispray_to_connection(const std::vector<Expr>& G) {
  const int n = static_cast<int>(G.size());
  ExprTensor N = ExprTensor::cube(2, dim(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) N(j, k) = expr::diff(G[j], VarId::y(k + 1));
  return N;
}

std::vector<Expr> connection_to_semispray(const ExprTensor& N) {
  const int n = static_cast<int>(N.shape().at(0));
  std::vector<Expr> G;
  for (int j = 0; j < n; ++j) {
    Expr s = 0.0;
    for (int m = 0; m < n; ++m) s = s + N(j, m) * y(m);
    G.push_back(expr::simplify(Expr(0.5) * s));
  }
  return G;
}

Expr total_derivative(const Expr& e, const SodeModel& m) {
  Expr d = expr::diff(e, VarId::time());
  for (int k = 0; k < m.n; ++k) {
    d = d + expr::diff(e, VarId::x(k + 1)) * y(k);
    d = d - expr::diff(e, VarId::y(k + 1)) * m.F[k];
  }
  return expr::simplify(d);
}

namespace {

std::vector<Expr> covariant(const std::vector<Expr>& T, const SodeModel& m, double h_sign) {
  if (static_cast<int>(T.size()) != m.n) throw std::invalid_argument("covariant derivative needs n components");
  const Expr H = geometry::christoffel_temporal(m.h);
  const auto Fy = velocity_jacobian(m);
  std::vector<Expr> out;
  for (int i = 0; i < m.n; ++i) {
    Expr s = total_derivative(T[i], m);
    for (int r = 0; r < m.n; ++r) s = s + Expr(0.5) * Fy[i][r] * T[r];
    s = s + Expr(0.5 * h_sign) * H * T[i];
    out.push_back(expr::simplify(s));
  }
  return out;
}

}  // namespace

std::vector<Expr> kcc_covariant_derivative_T(const std::vector<Expr>& T, const SodeModel& m) {
  return covariant(T, m, -1.0);
}

std::vector<Expr> kcc_covariant_derivative_xi(const std::vector<Expr>& xi, const SodeModel& m) {
  return covariant(xi, m, +1.0);
}

std::vector<Expr> first_invariant(const SodeModel& m) {
  const Expr H = geometry::christoffel_temporal(m.h);
  const auto Fy = velocity_jacobian(m);
  std::vector<Expr> eps;
  for (int i = 0; i < m.n; ++i) {
    Expr s = -m.F[i];
    for (int r = 0; r < m.n; ++r) s = s + Expr(0.5) * Fy[i][r] * y(r);
    s = s - Expr(0.5) * H * y(i);
    eps.push_back(expr::simplify(s));
  }
  return eps;
}

ExprTensor deviation_curvature(const SodeModel& m) {
  const int n = m.n;
  const Expr H = geometry::christoffel_temporal(m.h);
  const Expr scalar = expr::simplify(Expr(0.5) * expr::diff(H, VarId::time()) - Expr(0.25) * H * H);
  const auto Fy = velocity_jacobian(m);
  ExprTensor P = ExprTensor::cube(2, dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Expr& Fij = Fy[i][j];
      Expr s = -expr::diff(m.F[i], VarId::x(j + 1)) + Expr(0.5) * expr::diff(Fij, VarId::time());
      for (int r = 0; r < n; ++r) {
        s = s + Expr(0.5) * expr::diff(Fij, VarId::x(r + 1)) * y(r);
        s = s - Expr(0.5) * expr::diff(Fij, VarId::y(r + 1)) * m.F[r];
        s = s + Expr(0.25) * Fy[i][r] * Fy[r][j];
      }
      if (i == j) s = s + scalar;
      P(i, j) = expr::simplify(s);
    }
  return P;
}

ExprTensor third_invariant(const ExprTensor& P) {
  const int n = static_cast<int>(P.shape().at(0));
  ExprTensor R = ExprTensor::cube(3, dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        R(i, j, k) = expr::simplify(Expr(1.0 / 3.0) *
                                    (expr::diff(P(i, j), VarId::y(k + 1)) - expr::diff(P(i, k), VarId::y(j + 1))));
  return R;
}

ExprTensor fourth_invariant(const ExprTensor& R3) {
  const int n = static_cast<int>(R3.shape().at(0));
  ExprTensor B = ExprTensor::cube(4, dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int mm = 0; mm < n; ++mm) B(i, j, k, mm) = expr::diff(R3(i, j, k), VarId::y(mm + 1));
  return B;
}

ExprTensor fifth_invariant(const SodeModel& m) {
  const int n = m.n;
  ExprTensor D = ExprTensor::cube(4, dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Expr dj = expr::diff(m.F[i], VarId::y(j + 1));
      for (int k = 0; k < n; ++k) {
        const Expr djk = expr::diff(dj, VarId::y(k + 1));
        for (int mm = 0; mm < n; ++mm) D(i, j, k, mm) = expr::diff(djk, VarId::y(mm + 1));
      }
    }
  return D;
}

InvariantSet all_invariants(const SodeModel& m) {
  InvariantSet s;
  s.epsilon = first_invariant(m);
  s.P = deviation_curvature(m);
  s.R3 = third_invariant(s.P);
  s.B4 = fourth_invariant(s.R3);
  s.D5 = fifth_invariant(m);
  return s;
}

}  // namespace kccjet::kcc
