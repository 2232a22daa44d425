#include <algorithm>
#include <cmath>

#include "kccjet/program.hpp"

#include "kccjet/kcc.hpp"

namespace kccjet::kcc {

CovarianceReport covariance_check(const SodeModel& m, const geometry::CoordinateChange& c,
                                  const std::vector<JetPoint>& points) {
  const int n = m.n;
  const InvariantSet old_inv = all_invariants(m);
  const InvariantSet new_inv = all_invariants(geometry::transform_sode(m, c));
  std::array<geometry::DTensor, 5> old_t, new_t;
  std::vector<Expr> old_all, new_all;
  for (std::size_t k = 0; k < 5; ++k) {
    old_t[k] = as_dtensor(old_inv, kAllInvariants[k], n);
    new_t[k] = as_dtensor(new_inv, kAllInvariants[k], n);
    old_all.insert(old_all.end(), old_t[k].components.data().begin(), old_t[k].components.data().end());
    new_all.insert(new_all.end(), new_t[k].components.data().begin(), new_t[k].components.data().end());
  }
  // Compiled once so implicit inverses are solved once per point.
  const expr::Program old_prog(old_all), new_prog(new_all);

  CovarianceReport rep;
  std::array<double, 5> diff{}, scale{};
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::array<double, 5> d{}, s{};
    try {
      const geometry::ChangeJacobians jac = geometry::jacobians_at(c, points[p]);
      const JetPoint q = geometry::transform_jetpoint(points[p], c);
      const std::vector<double> old_v = old_prog.run(points[p]);
      const std::vector<double> new_v = new_prog.run(q);
      std::size_t offset = 0;
      for (std::size_t k = 0; k < 5; ++k) {
        NumTensor b(old_t[k].components.shape());
        NumTensor a(new_t[k].components.shape());
        std::copy_n(old_v.begin() + offset, b.size(), b.data().begin());
        std::copy_n(new_v.begin() + offset, a.size(), a.data().begin());
        offset += a.size();
        b = geometry::transform_components(b, old_t[k].signature, jac, n);
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (!std::isfinite(a.data()[i]) || !std::isfinite(b.data()[i]))
            throw expr::EvalError("non-finite invariant component");
          d[k] = std::max(d[k], std::abs(a.data()[i] - b.data()[i]));
          s[k] = std::max(s[k], std::abs(b.data()[i]));
        }
      }
    } catch (const expr::EvalError& e) {
      rep.failures.push_back({p, e.what()});
      continue;
    }
    ++rep.points_used;
    for (std::size_t k = 0; k < 5; ++k) {
      diff[k] = std::max(diff[k], d[k]);
      scale[k] = std::max(scale[k], s[k]);
    }
  }
  for (std::size_t k = 0; k < 5; ++k) rep.discrepancy[k] = diff[k] / std::max(1.0, scale[k]);
  return rep;
}

}  // namespace kccjet::kcc
