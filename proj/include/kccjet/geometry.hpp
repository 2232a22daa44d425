#pragma once

// Geometric objects on the 1-jet space J1(R, M) in one local chart
// (t, x^i, y^i), y^i = dx^i/dt: metrics and their Christoffel symbols,
// curvature, canonical semisprays and nonlinear connections, second-order
// systems (SODEs), and coordinate changes with the d-tensor transformation
// law.
//
// Every tensor is stored with its indices in written order; index k holds
// the component labelled k+1.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "kccjet/expr.hpp"
#include "kccjet/tensor.hpp"

namespace kccjet::geometry {

using expr::Expr;
using expr::VarId;

// A point (t, x, y) of the jet space; same layout as an evaluation Env.
using JetPoint = expr::Env;

class SingularError : public expr::EvalError {
 public:
  using expr::EvalError::EvalError;
};

// h11(t): Riemannian metric on the time axis.
struct TemporalMetric {
  Expr h11 = 1.0;

  TemporalMetric() = default;
  explicit TemporalMetric(Expr h);
  // Throws EvalError unless h11(t) > 0.
  void check_at(double t) const;
};

// phi_ij(x): Riemannian metric on the spatial manifold.
struct SpatialMetric {
  int n = 0;
  std::vector<std::vector<Expr>> phi;

  SpatialMetric() = default;
  explicit SpatialMetric(std::vector<std::vector<Expr>> components);
  static SpatialMetric identity(int n);
  // Throws EvalError unless phi(x) is symmetric and positive definite
  // (leading principal minors).
  void check_at(const std::vector<double>& x) const;
};

// Gamma^i_{jk}(x), symmetric in the lower indices.
struct LinearConnection {
  int n = 0;
  ExprTensor gamma;  // shape (n, n, n)

  LinearConnection() = default;
  explicit LinearConnection(ExprTensor components);
  // Throws EvalError if gamma[i][j][k] != gamma[i][k][j] at x (relative tol).
  void check_symmetric_at(const std::vector<double>& x, double tol = 1e-12) const;
};

struct NonlinearConnection {
  std::vector<Expr> M;  // temporal components M^(j)_(1)1
  ExprTensor N;         // spatial components N^(j)_(1)i, shape (n, n) as [j][i]
};

struct TemporalSemispray {
  std::vector<Expr> H;
};

struct SpatialSemispray {
  std::vector<Expr> G;
};

namespace provenance {
struct Explicit {};
struct Harmonic {
  TemporalMetric h;
  SpatialMetric phi;
};
struct VectorField {
  std::vector<Expr> X;
};
struct Connection {
  LinearConnection gamma;
};
}  // namespace provenance

using Provenance =
    std::variant<provenance::Explicit, provenance::Harmonic, provenance::VectorField, provenance::Connection>;

std::string provenance_name(const Provenance& p);

// d^2 x^i/dt^2 + F^i(t, x, y) = 0 together with a temporal metric.
struct SodeModel {
  int n = 0;
  TemporalMetric h;
  std::vector<Expr> F;
  Provenance provenance = provenance::Explicit{};

  SodeModel() = default;
  SodeModel(int dim, TemporalMetric metric, std::vector<Expr> forces, Provenance origin = provenance::Explicit{});
};

enum class IndexKind { SpatialUp, SpatialDown, TimeUp, TimeDown, JetUp, JetDown };

// Distinguished tensor: components over (t, x, y) with one index kind per
// axis. Spatial and jet axes have extent n, time axes extent 1.
struct DTensor {
  std::vector<IndexKind> signature;
  ExprTensor components;

  DTensor() = default;
  DTensor(std::vector<IndexKind> sig, ExprTensor comps, int n);
};

// Shape of the component array for a signature in dimension n.
std::vector<std::size_t> dtensor_shape(const std::vector<IndexKind>& signature, int n);

// Inverse of a coordinate map: supplied expressions, Newton iteration on
// the forward map, or absent.
struct InverseMap {
  enum class Kind { Missing, Explicit, Newton };
  Kind kind = Kind::Missing;
  std::vector<Expr> exprs;  // Explicit only; over the new chart's variables

  static InverseMap missing() { return {}; }
  static InverseMap newton() { return {Kind::Newton, {}}; }
  static InverseMap explicit_map(std::vector<Expr> e) { return {Kind::Explicit, std::move(e)}; }
};

// t~ = t~(t), x~ = x~(x). Forward maps are written in the old chart's
// variables; explicit inverses in the new chart's variables (which carry
// the same names t, x1..xn).
class CoordinateChange {
 public:
  CoordinateChange(int n, Expr t_fwd, InverseMap t_inv, std::vector<Expr> x_fwd, InverseMap x_inv);
  static CoordinateChange identity(int n);

  int dim() const { return n_; }
  const Expr& t_forward() const { return t_fwd_; }
  const std::vector<Expr>& x_forward() const { return x_fwd_; }
  const InverseMap& t_inverse() const { return t_inv_; }
  const InverseMap& x_inverse() const { return x_inv_; }

  // Symbolic Jacobian data in the old chart's variables.
  const Expr& dt_new_dt() const { return dtnew_; }  // dt~/dt
  const Expr& dt_dt_new() const { return s_; }      // dt/dt~ as a function of t
  const std::vector<std::vector<Expr>>& jacobian() const { return jac_; }          // dx~^a/dx^i as [a][i]
  const std::vector<std::vector<Expr>>& jacobian_inverse() const { return jinv_; }  // dx^i/dx~^a as [i][a]
  // x~_1^r(t, x, y) = (dx~^r/dx^k)(dt/dt~) y^k
  const std::vector<Expr>& new_velocity() const { return ynew_; }

  // Old coordinates as expressions in the new chart's variables.
  Expr old_time() const;
  std::vector<Expr> old_space() const;
  bool invertible() const;

  // Round-trip and nonsingularity checks at sample points (old chart).
  void validate(const std::vector<JetPoint>& samples, double tol = 1e-9) const;

 private:
  int n_;
  Expr t_fwd_;
  InverseMap t_inv_;
  std::vector<Expr> x_fwd_;
  InverseMap x_inv_;
  Expr dtnew_, s_;
  std::vector<std::vector<Expr>> jac_, jinv_;
  std::vector<Expr> ynew_;
  std::shared_ptr<const expr::ImplicitInverse> t_newton_, x_newton_;
};

// Numeric Jacobian data of a change at a point of the old chart.
struct ChangeJacobians {
  double dtnew_dt = 1.0;
  std::vector<std::vector<double>> J;     // [a][i]
  std::vector<std::vector<double>> Jinv;  // [i][a]
};
ChangeJacobians jacobians_at(const CoordinateChange& c, const JetPoint& p);

// Symbolic inverse of a small matrix via adjugate and determinant.
std::vector<std::vector<Expr>> symbolic_inverse(const std::vector<std::vector<Expr>>& m);

Expr christoffel_temporal(const TemporalMetric& h);
// Symbolic for n <= 3; throws std::domain_error above (use christoffel_spatial_at).
ExprTensor christoffel_spatial(const SpatialMetric& phi);
// Per-point Christoffel symbols from a numeric metric inverse, any n.
NumTensor christoffel_spatial_at(const SpatialMetric& phi, const std::vector<double>& x);
// R^i_{pqj} = d_j g^i_pq - d_q g^i_pj + g^r_pq g^i_rj - g^r_pj g^i_rq
ExprTensor riemann_curvature(const ExprTensor& gamma);

TemporalSemispray canonical_temporal_semispray(const TemporalMetric& h, int n);
SpatialSemispray canonical_spatial_semispray(const SpatialMetric& phi);
NonlinearConnection canonical_nonlinear_connection(const TemporalMetric& h, const SpatialMetric& phi);

SodeModel sode_from_harmonic_curves(const TemporalMetric& h, const SpatialMetric& phi);
SodeModel sode_from_vectorfield(const std::vector<Expr>& X, const TemporalMetric& h);
SodeModel sode_from_connection(const LinearConnection& gamma, const TemporalMetric& h);

JetPoint transform_jetpoint(const JetPoint& p, const CoordinateChange& c);
// Components of T at p, expressed in the new chart at transform_jetpoint(p).
NumTensor transform_dtensor(const DTensor& T, const CoordinateChange& c, const JetPoint& p);
// Same law applied to already evaluated components.
NumTensor transform_components(const NumTensor& values, const std::vector<IndexKind>& signature,
                               const ChangeJacobians& jac, int n);
SodeModel transform_sode(const SodeModel& m, const CoordinateChange& c);

// Metrics pulled to the new chart (expressions in the new variables).
TemporalMetric transform_temporal_metric(const TemporalMetric& h, const CoordinateChange& c);
SpatialMetric transform_spatial_metric(const SpatialMetric& phi, const CoordinateChange& c);
// Any expression of the old chart rewritten in the new chart's variables.
Expr to_new_chart(const Expr& e, const CoordinateChange& c);

DTensor make_liouville(int n);
DTensor make_normalization(const TemporalMetric& h, int n);

// Largest variable index used in e (0 if none).
int max_index(const Expr& e);

}  // namespace kccjet::geometry
