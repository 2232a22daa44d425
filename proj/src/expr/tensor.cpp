#include <cmath>

#include "kccjet/tensor.hpp"

namespace kccjet {

NumTensor evaluate(const ExprTensor& t, const expr::Env& env) {
  return t.map([&](const expr::Expr& e) { return expr::eval(e, env); });
}

ExprTensor simplify(const ExprTensor& t) {
  return t.map([](const expr::Expr& e) { return expr::simplify(e); });
}

double max_abs(const NumTensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace kccjet
