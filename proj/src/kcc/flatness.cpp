#include <cmath>

#include "kccjet/grid.hpp"
#include "kccjet/kcc.hpp"

namespace kccjet::kcc {

using expr::VarId;

namespace {

// Appends the components of t to out and returns the [begin, end) range.
std::pair<std::size_t, std::size_t> append(std::vector<Expr>& out, const std::vector<Expr>& t) {
  const std::size_t begin = out.size();
  out.insert(out.end(), t.begin(), t.end());
  return {begin, out.size()};
}

double range_max(const GridResult& g, std::size_t point, std::pair<std::size_t, std::size_t> r) {
  double m = 0.0;
  for (std::size_t c = r.first; c < r.second; ++c) m = std::max(m, std::abs(g(point, c)));
  return m;
}

}  // namespace

FlatnessReport flatness_check(const SodeModel& m, const std::vector<JetPoint>& samples, double tol) {
  const int n = m.n;
  const InvariantSet inv = all_invariants(m);
  const Expr H = geometry::christoffel_temporal(m.h);

  ExprTensor gamma = ExprTensor::cube(3, static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Expr dj = expr::diff(m.F[i], VarId::y(j + 1));
      for (int k = 0; k < n; ++k) gamma(i, j, k) = expr::simplify(Expr(0.5) * expr::diff(dj, VarId::y(k + 1)));
    }
  std::vector<Expr> gamma_t, gamma_y, residual;
  for (const Expr& g : gamma.data()) {
    gamma_t.push_back(expr::diff(g, VarId::time()));
    for (int k = 0; k < n; ++k) gamma_y.push_back(expr::diff(g, VarId::y(k + 1)));
  }
  for (int i = 0; i < n; ++i) {
    Expr s = m.F[i] + H * Expr(VarId::y(i + 1));
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) s = s - gamma(i, p, q) * Expr(VarId::y(p + 1)) * Expr(VarId::y(q + 1));
    residual.push_back(expr::simplify(s));
  }
  const ExprTensor curvature = geometry::riemann_curvature(gamma);

  std::vector<Expr> outputs;
  std::array<std::pair<std::size_t, std::size_t>, 5> inv_range;
  for (std::size_t k = 0; k < kAllInvariants.size(); ++k)
    inv_range[k] = append(outputs, invariant_components(inv, kAllInvariants[k]).data());
  const auto t_range = append(outputs, gamma_t);
  const auto y_range = append(outputs, gamma_y);
  const auto res_range = append(outputs, residual);
  const auto curv_range = append(outputs, curvature.data());
  // F and Gamma themselves must be defined at a usable sample
  append(outputs, m.F);
  append(outputs, gamma.data());

  const expr::Program program(outputs);
  const GridResult grid = evaluate_grid(program, samples);

  FlatnessReport rep;
  for (std::size_t p = 0; p < samples.size(); ++p) {
    if (!grid.ok(p)) {
      rep.failures.push_back({p, *grid.errors[p]});
      continue;
    }
    ++rep.samples_used;
    for (std::size_t k = 0; k < 5; ++k) rep.invariant_max[k] = std::max(rep.invariant_max[k], range_max(grid, p, inv_range[k]));
    rep.gamma_t_max = std::max(rep.gamma_t_max, range_max(grid, p, t_range));
    rep.gamma_y_max = std::max(rep.gamma_y_max, range_max(grid, p, y_range));
    rep.residual_max = std::max(rep.residual_max, range_max(grid, p, res_range));
    rep.curvature_max = std::max(rep.curvature_max, range_max(grid, p, curv_range));
  }
  if (rep.samples_used == 0) throw std::invalid_argument("flatness_check: no sample point could be evaluated");

  rep.vanish = true;
  for (double v : rep.invariant_max) rep.vanish = rep.vanish && v < tol;
  const bool reconstructed = rep.invariant_max[4] < tol && rep.gamma_t_max < tol && rep.gamma_y_max < tol &&
                             rep.residual_max < tol;
  if (reconstructed) rep.gamma = gamma;
  rep.connection_flat = reconstructed && rep.curvature_max < tol;
  rep.consistent = rep.vanish == rep.connection_flat;
  return rep;
}

}  // namespace kccjet::kcc
