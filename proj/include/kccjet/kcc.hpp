#pragma once

// KCC geometry of a SODE  x'' + F(t, x, x') = 0  paired with a temporal
// metric h11(t): the semispray / nonlinear connection attached to F, the
// h-KCC covariant derivatives, and the five h-KCC invariants.
//
// Everything is symbolic; numbers only appear when a caller evaluates at a
// point. Time derivatives are taken along the flow, dx/dt = y, dy/dt = -F.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kccjet/geometry.hpp"

namespace kccjet::kcc {

using expr::Expr;
using geometry::JetPoint;
using geometry::SodeModel;

struct InvariantSet {
  std::vector<Expr> epsilon;  // (n)
  ExprTensor P;               // (n, n)        P^i_j
  ExprTensor R3;              // (n, n, n)     R^i_jk
  ExprTensor B4;              // (n, n, n, n)  B^i_jkm
  ExprTensor D5;              // (n, n, n, n)  D^i_jkm
};

enum class Invariant { Epsilon, P, R3, B4, D5 };
inline constexpr std::array<Invariant, 5> kAllInvariants{Invariant::Epsilon, Invariant::P, Invariant::R3,
                                                         Invariant::B4, Invariant::D5};

std::string_view invariant_name(Invariant which);
// Accepts "epsilon", "P", "R3", "B4", "D5" (case-insensitive).
std::optional<Invariant> parse_invariant(std::string_view name);

// Index kinds of each invariant as a d-tensor. Time axes have extent one,
// so the components are the InvariantSet array with unit axes inserted.
std::vector<geometry::IndexKind> invariant_signature(Invariant which);
geometry::DTensor as_dtensor(const InvariantSet& s, Invariant which, int n);
// The member array of s for `which`; epsilon as a rank-1 tensor.
ExprTensor invariant_components(const InvariantSet& s, Invariant which);

struct SemisprayDecomposition {
  std::vector<Expr> G;  // spatial semispray
  ExprTensor N;         // (n, n) as [i][j] = dG^i / dy^j
  std::vector<Expr> M;  // temporal components, -H y
  Expr H;               // temporal Christoffel symbol
};

SemisprayDecomposition decompose(const SodeModel& m);
// N^j_k = dG^j/dy^k
ExprTensor semispray_to_connection(const std::vector<Expr>& G);
// G^j = N^j_m y^m / 2
std::vector<Expr> connection_to_semispray(const ExprTensor& N);

// d e/dt = de/dt + y^k de/dx^k - F^k de/dy^k
Expr total_derivative(const Expr& e, const SodeModel& m);

// D T^i/dt = dT^i/dt + (1/2) dF^i/dy^r T^r - (1/2) H T^i
std::vector<Expr> kcc_covariant_derivative_T(const std::vector<Expr>& T, const SodeModel& m);
// D xi^i/dt = dxi^i/dt + (1/2) dF^i/dy^r xi^r + (1/2) H xi^i
std::vector<Expr> kcc_covariant_derivative_xi(const std::vector<Expr>& xi, const SodeModel& m);

std::vector<Expr> first_invariant(const SodeModel& m);
ExprTensor deviation_curvature(const SodeModel& m);
ExprTensor third_invariant(const ExprTensor& P);
ExprTensor fourth_invariant(const ExprTensor& R3);
ExprTensor fifth_invariant(const SodeModel& m);
InvariantSet all_invariants(const SodeModel& m);

struct PointFailure {
  std::size_t index;  // position in the sample list
  std::string message;
};

struct FlatnessReport {
  // Largest |component| of each invariant over the usable samples.
  std::array<double, 5> invariant_max{};
  bool vanish = false;

  // Gamma^i_jk = (1/2) d^2F^i/dy^j dy^k, reported only when it depends on x
  // alone and reproduces F = Gamma y y - H y at every sample.
  std::optional<ExprTensor> gamma;
  double gamma_t_max = 0.0;   // max |dGamma/dt|
  double gamma_y_max = 0.0;   // max |dGamma/dy|
  double residual_max = 0.0;  // max |F - Gamma y y + H y|
  double curvature_max = 0.0; // max |curvature of Gamma|
  bool connection_flat = false;

  // The two verdicts of the characterization agree.
  bool consistent = false;

  std::size_t samples_used = 0;
  std::vector<PointFailure> failures;
};

// Throws std::invalid_argument when no sample point can be evaluated.
FlatnessReport flatness_check(const SodeModel& m, const std::vector<JetPoint>& samples, double tol = 1e-8);

// Transform-then-compute against compute-then-transform for every
// invariant. Discrepancy per invariant is max |a - b| / max(1, max |b|) over
// the usable points, where a is the invariant of transform_sode(m, c) at the
// image point and b the d-tensor transform of the original invariant.
struct CovarianceReport {
  std::array<double, 5> discrepancy{};
  std::size_t points_used = 0;
  std::vector<PointFailure> failures;  // singular Jacobian or evaluation error
};

CovarianceReport covariance_check(const SodeModel& m, const geometry::CoordinateChange& c,
                                  const std::vector<JetPoint>& points);

}  // namespace kccjet::kcc
