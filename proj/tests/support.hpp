#pragma once

// Shared helpers for the unit and acceptance suites: deterministic sampling,
// tolerance checks and a generator of well-defined random expressions.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kccjet/expr.hpp"

namespace kccjet::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int index(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 gen_;
};

inline expr::Env random_env(Rng& rng, int n, double t_lo = 0.5, double t_hi = 1.5, double x_lo = -1.0,
                            double x_hi = 1.0, double y_lo = -1.0, double y_hi = 1.0) {
  expr::Env env;
  env.t = rng.uniform(t_lo, t_hi);
  for (int i = 0; i < n; ++i) env.x.push_back(rng.uniform(x_lo, x_hi));
  for (int i = 0; i < n; ++i) env.y.push_back(rng.uniform(y_lo, y_hi));
  return env;
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= std::max(rel * scale, abs_floor);
}

// Second partial d^2 e / da db by central differences of e itself.
inline double fd_second(const expr::Expr& e, expr::VarId a, expr::VarId b, const expr::Env& env, double h = 1e-4) {
  auto at = [&](double da, double db) {
    expr::Env p = env;
    p.set(a, p.get(a) + da);
    p.set(b, p.get(b) + db);
    return expr::eval(e, p);
  };
  if (a == b) return (at(h, 0) - 2 * at(0, 0) + at(-h, 0)) / (h * h);
  return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
}

// Random expressions whose evaluation is defined for every real input.
class ExprGenerator {
 public:
  ExprGenerator(Rng& rng, int dim) : rng_(rng), dim_(dim) {}

  expr::Expr leaf() {
    switch (rng_.index(4)) {
      case 0:
        return expr::Expr::constant(std::round(rng_.uniform(-3.0, 3.0) * 4.0) / 4.0);
      case 1:
        return expr::Expr::var(expr::VarId::time());
      case 2:
        return expr::Expr::var(expr::VarId::x(1 + rng_.index(dim_)));
      default:
        return expr::Expr::var(expr::VarId::y(1 + rng_.index(dim_)));
    }
  }

  expr::Expr make(int depth) {
    using expr::Expr;
    using expr::Fn;
    using expr::Op;
    if (depth <= 0) return leaf();
    switch (rng_.index(10)) {
      case 0:
        return Expr::raw_binary(Op::Add, make(depth - 1), make(depth - 1));
      case 1:
        return Expr::raw_binary(Op::Sub, make(depth - 1), make(depth - 1));
      case 2:
      case 3:
        return Expr::raw_binary(Op::Mul, make(depth - 1), make(depth - 1));
      case 4:  // denominator bounded away from zero
        return Expr::raw_binary(
            Op::Div, make(depth - 1),
            Expr::raw_binary(Op::Add, Expr::constant(2.0), Expr::raw_apply(Fn::Cos, make(depth - 1))));
      case 5:
        return Expr::raw_binary(Op::Pow, make(depth - 1), Expr::constant(2.0 + rng_.index(2)));
      case 6:
        return Expr::raw_neg(make(depth - 1));
      case 7: {
        const Fn fns[] = {Fn::Sin, Fn::Cos, Fn::Atan, Fn::Tanh};
        return Expr::raw_apply(fns[rng_.index(4)], make(depth - 1));
      }
      case 8:  // exp of a bounded argument
        return Expr::raw_apply(Fn::Exp, Expr::raw_apply(Fn::Sin, make(depth - 1)));
      default: {
        // sqrt/log of a strictly positive argument
        Expr positive = Expr::raw_binary(Op::Add, Expr::constant(1.5),
                                         Expr::raw_apply(Fn::Sin, make(depth - 1)));
        return Expr::raw_apply(rng_.index(2) ? Fn::Sqrt : Fn::Log, positive);
      }
    }
  }

 private:
  Rng& rng_;
  int dim_;
};

}  // namespace kccjet::testing
