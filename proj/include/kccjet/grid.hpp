#pragma once

// Evaluation of a batch of expressions over many sample points.
//
// evaluate_grid_serial is the reference: plain recursive evaluation, one
// point after another. evaluate_grid is the production kernel: a compiled
// Program evaluated with an OpenMP parallel loop over points. Both fill the
// result in input order, so their outputs are identical.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kccjet/expr.hpp"
#include "kccjet/program.hpp"

namespace kccjet {

struct GridResult {
  std::size_t points = 0;
  std::size_t components = 0;
  std::vector<double> values;               // points x components, row-major
  std::vector<std::optional<std::string>> errors;  // per point; set when evaluation failed

  double operator()(std::size_t point, std::size_t component) const {
    return values[point * components + component];
  }
  bool ok(std::size_t point) const { return !errors[point].has_value(); }
  std::size_t failures() const;
};

GridResult evaluate_grid_serial(std::span<const expr::Expr> components, std::span<const expr::Env> points);
GridResult evaluate_grid(const expr::Program& program, std::span<const expr::Env> points);
GridResult evaluate_grid(std::span<const expr::Expr> components, std::span<const expr::Env> points);

int worker_threads();

}  // namespace kccjet
