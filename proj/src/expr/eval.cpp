#include "node.hpp"

namespace kccjet::expr {

double eval(const Expr& e, const Env& env) {
  switch (e.op()) {
    case Op::Const:
      return e.value();
    case Op::Var:
      return env.get(e.var_id());
    case Op::Add:
      return check_finite(eval(e.arg(0), env) + eval(e.arg(1), env), "addition");
    case Op::Sub:
      return check_finite(eval(e.arg(0), env) - eval(e.arg(1), env), "subtraction");
    case Op::Mul:
      return check_finite(eval(e.arg(0), env) * eval(e.arg(1), env), "multiplication");
    case Op::Div:
      return apply_div(eval(e.arg(0), env), eval(e.arg(1), env));
    case Op::Pow:
      return apply_pow(eval(e.arg(0), env), eval(e.arg(1), env));
    case Op::Neg:
      return -eval(e.arg(0), env);
    case Op::Apply:
      return apply_fn(e.fn(), eval(e.arg(0), env));
    case Op::Inverse: {
      std::vector<double> target;
      target.reserve(e.args().size());
      for (const auto& a : e.args()) target.push_back(eval(a, env));
      return e.inverse_map().solve(target)[e.inverse_component()];
    }
  }
  return 0.0;
}

}  // namespace kccjet::expr
