#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_map>

#include "node.hpp"

namespace kccjet::expr {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_double(double v) { return std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(v)); }

std::size_t hash_inverse(const ImplicitInverse& m) {
  std::size_t h = static_cast<std::size_t>(m.kind) + 17;
  for (const auto& f : m.forward) h = mix(h, f.hash());
  return h;
}

const Node& node_of(const Expr& e) { return *e.node(); }

template <class T>
int cmp3(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

int compare_inverse(const ImplicitInverse& a, const ImplicitInverse& b) {
  if (&a == &b) return 0;
  if (int c = cmp3(a.kind, b.kind)) return c;
  if (int c = cmp3(a.forward.size(), b.forward.size())) return c;
  for (std::size_t i = 0; i < a.forward.size(); ++i)
    if (int c = compare(a.forward[i], b.forward[i])) return c;
  return 0;
}

bool foldable(double v) { return std::isfinite(v); }

// Children are interned already, so node identity reduces to a shallow check.
bool same_node(const Node& a, const Node& b) {
  if (a.hash != b.hash || a.op != b.op || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (a.args[i].node() != b.args[i].node()) return false;
  switch (a.op) {
    case Op::Const:
      return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
    case Op::Var:
      return a.var == b.var;
    case Op::Apply:
      return a.fn == b.fn;
    case Op::Inverse:
      return a.component == b.component && compare_inverse(*a.inverse, *b.inverse) == 0;
    default:
      return true;
  }
}

// Hash-consing table: structurally equal expressions share one node, which
// makes equality and ordering of shared subtrees a pointer comparison.
class InternTable {
 public:
  std::shared_ptr<const Node> intern(Node&& n) {
    std::lock_guard lock(mutex_);
    auto [it, hi] = table_.equal_range(n.hash);
    while (it != hi) {
      auto live = it->second.lock();
      if (!live) {
        it = table_.erase(it);
        continue;
      }
      if (same_node(*live, n)) return live;
      ++it;
    }
    std::shared_ptr<const Node> fresh(new Node(std::move(n)));
    table_.emplace(fresh->hash, fresh);
    if (table_.size() > sweep_at_) sweep();
    return fresh;
  }

 private:
  void sweep() {
    std::erase_if(table_, [](const auto& kv) { return kv.second.expired(); });
    sweep_at_ = std::max<std::size_t>(1 << 16, 2 * table_.size());
  }

  std::mutex mutex_;
  std::unordered_multimap<std::size_t, std::weak_ptr<const Node>> table_;
  std::size_t sweep_at_ = 1 << 16;
};

InternTable& intern_table() {
  static InternTable* t = new InternTable;  // outlives static Exprs
  return *t;
}

}  // namespace

Expr make_expr(Node n) {
  std::size_t h = static_cast<std::size_t>(n.op);
  std::size_t size = 1;
  switch (n.op) {
    case Op::Const:
      if (n.value == 0.0) n.value = 0.0;  // drop the sign of -0
      h = mix(h, hash_double(n.value));
      break;
    case Op::Var:
      h = mix(h, static_cast<std::size_t>(n.var.kind));
      h = mix(h, static_cast<std::size_t>(n.var.index));
      break;
    case Op::Apply:
      h = mix(h, static_cast<std::size_t>(n.fn));
      break;
    case Op::Inverse:
      h = mix(h, hash_inverse(*n.inverse));
      h = mix(h, static_cast<std::size_t>(n.component));
      break;
    default:
      break;
  }
  for (const auto& a : n.args) {
    h = mix(h, a.hash());
    size += a.size();
  }
  n.hash = h;
  n.size = size;
  return Expr(intern_table().intern(std::move(n)));
}

std::string to_string(VarId v) {
  switch (v.kind) {
    case VarKind::Time:
      return "t";
    case VarKind::Spatial:
      return "x" + std::to_string(v.index);
    case VarKind::Velocity:
      return "y" + std::to_string(v.index);
  }
  return "?";
}

std::string_view fn_name(Fn f) {
  switch (f) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Tan: return "tan";
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Sqrt: return "sqrt";
    case Fn::Atan: return "atan";
    case Fn::Sinh: return "sinh";
    case Fn::Cosh: return "cosh";
    case Fn::Tanh: return "tanh";
  }
  return "?";
}

double Env::get(VarId v) const {
  switch (v.kind) {
    case VarKind::Time:
      return t;
    case VarKind::Spatial:
      if (v.index < 1 || v.index > static_cast<int>(x.size()))
        throw EvalError("variable " + to_string(v) + " outside environment of dimension " +
                        std::to_string(x.size()));
      return x[v.index - 1];
    case VarKind::Velocity:
      if (v.index < 1 || v.index > static_cast<int>(y.size()))
        throw EvalError("variable " + to_string(v) + " outside environment of dimension " +
                        std::to_string(y.size()));
      return y[v.index - 1];
  }
  return 0.0;
}

void Env::set(VarId v, double value) {
  switch (v.kind) {
    case VarKind::Time:
      t = value;
      return;
    case VarKind::Spatial:
      x.at(v.index - 1) = value;
      return;
    case VarKind::Velocity:
      y.at(v.index - 1) = value;
      return;
  }
}

Expr::Expr() : Expr(constant(0.0)) {}
Expr::Expr(double c) : Expr(constant(c)) {}
Expr::Expr(VarId v) : Expr(var(v)) {}

Expr Expr::constant(double c) {
  Node n;
  n.op = Op::Const;
  n.value = c;
  return make_expr(std::move(n));
}

Expr Expr::var(VarId v) {
  Node n;
  n.op = Op::Var;
  n.var = v;
  return make_expr(std::move(n));
}

Expr Expr::raw_binary(Op op, Expr a, Expr b) {
  Node n;
  n.op = op;
  n.args = {std::move(a), std::move(b)};
  return make_expr(std::move(n));
}

Expr Expr::raw_neg(Expr a) {
  Node n;
  n.op = Op::Neg;
  n.args = {std::move(a)};
  return make_expr(std::move(n));
}

Expr Expr::raw_apply(Fn f, Expr a) {
  Node n;
  n.op = Op::Apply;
  n.fn = f;
  n.args = {std::move(a)};
  return make_expr(std::move(n));
}

Expr Expr::inverse(std::shared_ptr<const ImplicitInverse> map, int component, std::vector<Expr> args) {
  if (!map || component < 0 || component >= map->size() || static_cast<int>(args.size()) != map->size())
    throw std::invalid_argument("inverse node: inconsistent map, component or argument count");
  Node n;
  n.op = Op::Inverse;
  n.inverse = std::move(map);
  n.component = component;
  n.args = std::move(args);
  return make_expr(std::move(n));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
VarId Expr::var_id() const { return node_->var; }
Fn Expr::fn() const { return node_->fn; }
std::span<const Expr> Expr::args() const { return node_->args; }
const ImplicitInverse& Expr::inverse_map() const { return *node_->inverse; }
int Expr::inverse_component() const { return node_->component; }
std::size_t Expr::hash() const { return node_->hash; }
std::size_t Expr::size() const { return node_->size; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  const Node& x = node_of(a);
  const Node& y = node_of(b);
  if (int c = cmp3(x.op, y.op)) return c;
  switch (x.op) {
    case Op::Const:
      return cmp3(x.value, y.value);
    case Op::Var:
      return cmp3(x.var, y.var);
    case Op::Apply:
      if (int c = cmp3(x.fn, y.fn)) return c;
      break;
    case Op::Inverse:
      if (int c = compare_inverse(*x.inverse, *y.inverse)) return c;
      if (int c = cmp3(x.component, y.component)) return c;
      break;
    default:
      break;
  }
  if (int c = cmp3(x.args.size(), y.args.size())) return c;
  for (std::size_t i = 0; i < x.args.size(); ++i)
    if (int c = compare(x.args[i], y.args[i])) return c;
  return 0;
}

double check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
  return v;
}

double apply_div(double num, double den) {
  if (den == 0.0) throw EvalError("division by zero");
  return check_finite(num / den, "division");
}

double apply_pow(double base, double exponent) {
  if (!is_integer(exponent) && base <= 0.0)
    throw EvalError("non-integer power of non-positive base");
  if (base == 0.0 && exponent < 0.0) throw EvalError("division by zero");
  return check_finite(std::pow(base, exponent), "power");
}

double apply_fn(Fn f, double a) {
  switch (f) {
    case Fn::Sin: return std::sin(a);
    case Fn::Cos: return std::cos(a);
    case Fn::Tan: return check_finite(std::tan(a), "tan");
    case Fn::Exp: return check_finite(std::exp(a), "exp");
    case Fn::Log:
      if (a <= 0.0) throw EvalError("log of non-positive argument");
      return std::log(a);
    case Fn::Sqrt:
      if (a < 0.0) throw EvalError("sqrt of negative argument");
      return std::sqrt(a);
    case Fn::Atan: return std::atan(a);
    case Fn::Sinh: return check_finite(std::sinh(a), "sinh");
    case Fn::Cosh: return check_finite(std::cosh(a), "cosh");
    case Fn::Tanh: return std::tanh(a);
  }
  return 0.0;
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const() && foldable(a.value() + b.value())) return a.value() + b.value();
  if (a.is_const(0.0)) return b;
  if (b.is_const(0.0)) return a;
  if (b.op() == Op::Neg) return Expr::raw_binary(Op::Sub, a, b.arg(0));
  return Expr::raw_binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const() && foldable(a.value() - b.value())) return a.value() - b.value();
  if (b.is_const(0.0)) return a;
  if (a.is_const(0.0)) return -b;
  if (a == b) return 0.0;
  if (b.op() == Op::Neg) return Expr::raw_binary(Op::Add, a, b.arg(0));
  return Expr::raw_binary(Op::Sub, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_const()) return -a.value();
  if (a.op() == Op::Neg) return a.arg(0);
  return Expr::raw_neg(a);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const() && foldable(a.value() * b.value())) return a.value() * b.value();
  if (a.is_const(0.0) || b.is_const(0.0)) return 0.0;
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  if (a.is_const(-1.0)) return -b;
  if (b.is_const(-1.0)) return -a;
  return Expr::raw_binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const() && b.value() != 0.0 && foldable(a.value() / b.value()))
    return a.value() / b.value();
  if (b.is_const(1.0)) return a;
  if (a.is_const(0.0) && !b.is_const()) return 0.0;
  return Expr::raw_binary(Op::Div, a, b);
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_const(1.0)) return base;
  if (exponent.is_const(0.0)) return 1.0;
  if (base.is_const() && exponent.is_const()) {
    try {
      return apply_pow(base.value(), exponent.value());
    } catch (const EvalError&) {
    }
  }
  return Expr::raw_binary(Op::Pow, base, exponent);
}

Expr apply(Fn f, const Expr& a) {
  if (a.is_const()) {
    try {
      return apply_fn(f, a.value());
    } catch (const EvalError&) {
    }
  }
  return Expr::raw_apply(f, a);
}

VarId ImplicitInverse::variable(int k) const {
  return kind == VarKind::Time ? VarId::time() : VarId{kind, k + 1};
}

std::vector<double> ImplicitInverse::solve(std::span<const double> target) const {
  const int m = size();
  std::vector<double> z(target.begin(), target.end());
  Env env;
  env.x.assign(kind == VarKind::Time ? 0 : m, 0.0);
  env.y.assign(env.x.size(), 0.0);
  auto load = [&] {
    for (int k = 0; k < m; ++k) env.set(variable(k), z[k]);
  };
  std::vector<double> residual(m), step(m);
  for (int it = 0; it < max_iterations; ++it) {
    load();
    double scale = 0.0, change = 0.0;
    for (int k = 0; k < m; ++k) {
      residual[k] = eval(forward[k], env) - target[k];
      scale = std::max(scale, std::abs(target[k]));
    }
    for (int k = 0; k < m; ++k) {
      step[k] = 0.0;
      for (int a = 0; a < m; ++a) step[k] += eval(jacobian_inverse[k][a], env) * residual[a];
    }
    for (int k = 0; k < m; ++k) {
      z[k] -= step[k];
      change = std::max(change, std::abs(step[k]));
    }
    if (change <= tolerance * std::max(1.0, scale)) return z;
  }
  throw EvalError("implicit inverse did not converge");
}

Expr substitute(const Expr& e, const std::function<const Expr*(VarId)>& lookup) {
  switch (e.op()) {
    case Op::Const:
      return e;
    case Op::Var:
      if (const Expr* r = lookup(e.var_id())) return *r;
      return e;
    default:
      break;
  }
  Node n = *e.node();
  bool changed = false;
  for (auto& a : n.args) {
    Expr s = substitute(a, lookup);
    if (s.node() != a.node()) {
      a = std::move(s);
      changed = true;
    }
  }
  return changed ? make_expr(std::move(n)) : e;
}

bool depends_on(const Expr& e, VarKind kind) {
  if (e.op() == Op::Var) return e.var_id().kind == kind;
  for (const auto& a : e.args())
    if (depends_on(a, kind)) return true;
  return false;
}

bool depends_on(const Expr& e, VarId v) {
  if (e.op() == Op::Var) return e.var_id() == v;
  for (const auto& a : e.args())
    if (depends_on(a, v)) return true;
  return false;
}

double fd_derivative(const Expr& e, VarId v, const Env& env, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  Env plus = env, minus = env;
  const double v0 = env.get(v);
  plus.set(v, v0 + h);
  minus.set(v, v0 - h);
  return (eval(e, plus) - eval(e, minus)) / (2.0 * h);
}

double fd_derivative(const Expr& e, VarId v, const Env& env) {
  return fd_derivative(e, v, env, 1e-5 * std::max(1.0, std::abs(env.get(v))));
}

}  // namespace kccjet::expr
