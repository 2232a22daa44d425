#include "kccjet/grid.hpp"

namespace kccjet {

std::size_t GridResult::failures() const {
  std::size_t n = 0;
  for (const auto& e : errors) n += e.has_value();
  return n;
}

GridResult evaluate_grid_serial(std::span<const expr::Expr> components, std::span<const expr::Env> points) {
  GridResult r;
  r.points = points.size();
  r.components = components.size();
  r.values.assign(r.points * r.components, 0.0);
  r.errors.resize(r.points);
  for (std::size_t p = 0; p < points.size(); ++p) {
    try {
      for (std::size_t c = 0; c < components.size(); ++c)
        r.values[p * r.components + c] = expr::eval(components[c], points[p]);
    } catch (const std::exception& ex) {
      r.errors[p] = ex.what();
    }
  }
  return r;
}

}  // namespace kccjet
