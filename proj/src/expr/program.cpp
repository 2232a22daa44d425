#include "kccjet/program.hpp"

#include "node.hpp"

namespace kccjet::expr {

Program::Program(std::span<const Expr> outputs) {
  std::unordered_map<Expr, int> seen;
  outputs_.reserve(outputs.size());
  for (const auto& e : outputs) outputs_.push_back(emit(e, seen));
}

int Program::emit(const Expr& e, std::unordered_map<Expr, int>& seen) {
  if (auto it = seen.find(e); it != seen.end()) return it->second;
  Instr ins;
  ins.op = e.op();
  switch (e.op()) {
    case Op::Const:
      ins.value = e.value();
      break;
    case Op::Var:
      ins.var = e.var_id();
      break;
    case Op::Apply:
      ins.fn = e.fn();
      ins.a = emit(e.arg(0), seen);
      break;
    case Op::Neg:
      ins.a = emit(e.arg(0), seen);
      break;
    case Op::Inverse:
      ins.source = e;
      for (const auto& a : e.args()) ins.inverse_args.push_back(emit(a, seen));
      break;
    default:
      ins.a = emit(e.arg(0), seen);
      ins.b = emit(e.arg(1), seen);
      break;
  }
  code_.push_back(std::move(ins));
  const int slot = static_cast<int>(code_.size()) - 1;
  seen.emplace(e, slot);
  return slot;
}

void Program::run(const Env& env, std::span<double> out) const {
  std::vector<double> r(code_.size());
  std::vector<double> target;
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& ins = code_[i];
    switch (ins.op) {
      case Op::Const: r[i] = ins.value; break;
      case Op::Var: r[i] = env.get(ins.var); break;
      case Op::Add: r[i] = check_finite(r[ins.a] + r[ins.b], "addition"); break;
      case Op::Sub: r[i] = check_finite(r[ins.a] - r[ins.b], "subtraction"); break;
      case Op::Mul: r[i] = check_finite(r[ins.a] * r[ins.b], "multiplication"); break;
      case Op::Div: r[i] = apply_div(r[ins.a], r[ins.b]); break;
      case Op::Pow: r[i] = apply_pow(r[ins.a], r[ins.b]); break;
      case Op::Neg: r[i] = -r[ins.a]; break;
      case Op::Apply: r[i] = apply_fn(ins.fn, r[ins.a]); break;
      case Op::Inverse:
        target.clear();
        for (int a : ins.inverse_args) target.push_back(r[a]);
        r[i] = ins.source.inverse_map().solve(target)[ins.source.inverse_component()];
        break;
    }
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = r[outputs_[k]];
}

std::vector<double> Program::run(const Env& env) const {
  std::vector<double> out(outputs_.size());
  run(env, out);
  return out;
}

}  // namespace kccjet::expr
