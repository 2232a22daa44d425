#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "kccjet/expr.hpp"

namespace kccjet::expr {

struct Node {
  Op op = Op::Const;
  double value = 0.0;
  VarId var{};
  Fn fn = Fn::Sin;
  std::vector<Expr> args;
  std::shared_ptr<const ImplicitInverse> inverse;
  int component = 0;
  std::size_t hash = 0;
  std::size_t size = 1;
};

inline bool is_integer(double v) { return std::isfinite(v) && v == std::trunc(v); }

// Evaluate one function application; throws EvalError on domain violations.
double apply_fn(Fn f, double a);
double apply_pow(double base, double exponent);
double apply_div(double num, double den);

// Finite-result check shared by folding and evaluation.
double check_finite(double v, const char* what);

}  // namespace kccjet::expr
