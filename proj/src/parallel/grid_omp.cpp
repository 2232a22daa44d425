#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kccjet/grid.hpp"

namespace kccjet {

int worker_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

GridResult evaluate_grid(const expr::Program& program, std::span<const expr::Env> points) {
  GridResult r;
  r.points = points.size();
  r.components = program.outputs();
  r.values.assign(r.points * r.components, 0.0);
  r.errors.resize(r.points);
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  const std::size_t width = r.components;

#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    std::span<double> row(r.values.data() + p * width, width);
    try {
      program.run(points[p], row);
    } catch (const std::exception& ex) {
      r.errors[p] = ex.what();
    }
  }
  return r;
}

GridResult evaluate_grid(std::span<const expr::Expr> components, std::span<const expr::Env> points) {
  return evaluate_grid(expr::Program(components), points);
}

}  // namespace kccjet
