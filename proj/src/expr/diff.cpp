#include <unordered_map>

#include "node.hpp"

namespace kccjet::expr {

namespace {

Expr derive(const Expr& e, VarId v);

// Per-call cache so shared subtrees are differentiated once.
thread_local std::unordered_map<const Node*, Expr>* memo = nullptr;

Expr derive_apply(Fn f, const Expr& a) {
  switch (f) {
    case Fn::Sin: return cos(a);
    case Fn::Cos: return -sin(a);
    case Fn::Tan: return 1.0 / pow(cos(a), 2.0);
    case Fn::Exp: return exp(a);
    case Fn::Log: return 1.0 / a;
    case Fn::Sqrt: return 0.5 / sqrt(a);
    case Fn::Atan: return 1.0 / (1.0 + pow(a, 2.0));
    case Fn::Sinh: return apply(Fn::Cosh, a);
    case Fn::Cosh: return apply(Fn::Sinh, a);
    case Fn::Tanh: return 1.0 - pow(apply(Fn::Tanh, a), 2.0);
  }
  return 0.0;
}

// d/dv of x_k(z) where z = args and x = inverse of the forward map:
//   dx_k/dv = sum_a (J^-1)_{k a}(x(z)) * dz_a/dv.
Expr derive_inverse(const Expr& e, VarId v) {
  const ImplicitInverse& map = e.inverse_map();
  const int m = map.size();
  std::vector<Expr> components;
  components.reserve(m);
  const auto args = e.args();
  std::vector<Expr> arg_vec(args.begin(), args.end());
  std::shared_ptr<const ImplicitInverse> shared = e.node()->inverse;
  for (int k = 0; k < m; ++k) components.push_back(Expr::inverse(shared, k, arg_vec));
  auto lookup = [&](VarId var) -> const Expr* {
    if (var.kind != map.kind) return nullptr;
    const int k = map.kind == VarKind::Time ? 0 : var.index - 1;
    return (k >= 0 && k < m) ? &components[k] : nullptr;
  };
  Expr out = 0.0;
  for (int a = 0; a < m; ++a) {
    Expr da = derive(args[a], v);
    if (da.is_const(0.0)) continue;
    out = out + substitute(map.jacobian_inverse[e.inverse_component()][a], lookup) * da;
  }
  return out;
}

Expr derive_uncached(const Expr& e, VarId v);

Expr derive(const Expr& e, VarId v) {
  if (e.op() == Op::Const || e.op() == Op::Var) return derive_uncached(e, v);
  if (auto it = memo->find(e.node()); it != memo->end()) return it->second;
  Expr d = derive_uncached(e, v);
  memo->emplace(e.node(), d);
  return d;
}

Expr derive_uncached(const Expr& e, VarId v) {
  switch (e.op()) {
    case Op::Const:
      return 0.0;
    case Op::Var:
      return e.var_id() == v ? 1.0 : 0.0;
    case Op::Add:
      return derive(e.arg(0), v) + derive(e.arg(1), v);
    case Op::Sub:
      return derive(e.arg(0), v) - derive(e.arg(1), v);
    case Op::Neg:
      return -derive(e.arg(0), v);
    case Op::Mul: {
      const Expr& a = e.arg(0);
      const Expr& b = e.arg(1);
      return derive(a, v) * b + a * derive(b, v);
    }
    case Op::Div: {
      const Expr& a = e.arg(0);
      const Expr& b = e.arg(1);
      Expr da = derive(a, v);
      Expr db = derive(b, v);
      if (db.is_const(0.0)) return da / b;
      return (da * b - a * db) / pow(b, 2.0);
    }
    case Op::Pow: {
      const Expr& a = e.arg(0);
      const Expr& b = e.arg(1);
      Expr da = derive(a, v);
      Expr db = derive(b, v);
      if (b.is_const()) return b.value() * pow(a, b.value() - 1.0) * da;
      if (db.is_const(0.0)) return b * pow(a, b - 1.0) * da;
      return e * (db * log(a) + b * da / a);
    }
    case Op::Apply: {
      Expr da = derive(e.arg(0), v);
      if (da.is_const(0.0)) return 0.0;
      return derive_apply(e.fn(), e.arg(0)) * da;
    }
    case Op::Inverse:
      return derive_inverse(e, v);
  }
  return 0.0;
}

}  // namespace

Expr diff(const Expr& e, VarId v) {
  std::unordered_map<const Node*, Expr> local;
  auto* outer = memo;
  memo = &local;
  struct Reset {
    std::unordered_map<const Node*, Expr>* prev;
    ~Reset() { memo = prev; }
  } reset{outer};
  Expr d = derive(e, v);
  memo = outer;
  return simplify(d);
}

}  // namespace kccjet::expr
