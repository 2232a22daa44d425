#pragma once

// Symbolic scalar expressions over the jet coordinates (t, x1..xn, y1..yn).
//
// An Expr is an immutable, reference-counted tree. Structurally equal trees
// compare equal and evaluate equal everywhere. Every spatial or velocity
// index is 1-based, matching the printed grammar.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kccjet::expr {

enum class VarKind : std::uint8_t { Time, Spatial, Velocity };

struct VarId {
  VarKind kind = VarKind::Time;
  int index = 0;  // 1..n for Spatial/Velocity, 0 for Time

  static VarId time() { return {VarKind::Time, 0}; }
  static VarId x(int i) { return {VarKind::Spatial, i}; }
  static VarId y(int i) { return {VarKind::Velocity, i}; }

  friend bool operator==(const VarId&, const VarId&) = default;
  friend auto operator<=>(const VarId&, const VarId&) = default;
};

std::string to_string(VarId v);

enum class Fn : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Atan, Sinh, Cosh, Tanh };

std::string_view fn_name(Fn f);

enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Apply, Inverse };

// Point of evaluation. x and y are 0-based storage for x1..xn / y1..yn.
struct Env {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> y;

  double get(VarId v) const;
  void set(VarId v, double value);
  int dim() const { return static_cast<int>(x.size()); }
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at column " + std::to_string(pos + 1)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

struct Node;
struct ImplicitInverse;
class Expr;
Expr make_expr(Node n);

class Expr {
 public:
  Expr();  // constant zero
  Expr(double c);  // NOLINT(google-explicit-constructor)
  explicit Expr(VarId v);

  // Raw constructors: no folding. The parser uses these so that the printed
  // tree is exactly the parsed one.
  static Expr constant(double c);
  static Expr var(VarId v);
  static Expr raw_binary(Op op, Expr a, Expr b);
  static Expr raw_neg(Expr a);
  static Expr raw_apply(Fn f, Expr a);
  static Expr inverse(std::shared_ptr<const ImplicitInverse> map, int component,
                      std::vector<Expr> args);

  Op op() const;
  double value() const;  // Const only
  VarId var_id() const;  // Var only
  Fn fn() const;         // Apply only
  std::span<const Expr> args() const;
  const Expr& arg(std::size_t i) const { return args()[i]; }
  const ImplicitInverse& inverse_map() const;  // Inverse only
  int inverse_component() const;               // Inverse only

  bool is_const() const { return op() == Op::Const; }
  bool is_const(double c) const { return is_const() && value() == c; }
  std::size_t hash() const;
  std::size_t size() const;  // node count, shared subtrees counted per use
  const Node* node() const { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  friend Expr make_expr(Node n);
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Strict weak ordering by structure; deterministic across runs.
int compare(const Expr& a, const Expr& b);
struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

// Folding constructors (0/1 identities, constant folding where finite).
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr apply(Fn f, const Expr& a);
inline Expr sin(const Expr& a) { return apply(Fn::Sin, a); }
inline Expr cos(const Expr& a) { return apply(Fn::Cos, a); }
inline Expr exp(const Expr& a) { return apply(Fn::Exp, a); }
inline Expr log(const Expr& a) { return apply(Fn::Log, a); }
inline Expr sqrt(const Expr& a) { return apply(Fn::Sqrt, a); }

// Map x̃ -> x given only the forward map x -> x̃, solved by Newton's method
// at evaluation time. Derivatives follow from the inverse function theorem,
// so an Inverse node differentiates symbolically like any other node.
struct ImplicitInverse {
  VarKind kind = VarKind::Spatial;       // Time (one component) or Spatial (n)
  std::vector<Expr> forward;             // over the kind's variables
  std::vector<std::vector<Expr>> jacobian_inverse;  // [component][argument]
  int max_iterations = 60;
  double tolerance = 1e-15;

  int size() const { return static_cast<int>(forward.size()); }
  VarId variable(int k) const;  // k-th variable of the kind, 0-based
  std::vector<double> solve(std::span<const double> target) const;
};

Expr parse(std::string_view src, int dim);
std::string print(const Expr& e);

double eval(const Expr& e, const Env& env);
Expr diff(const Expr& e, VarId v);
Expr simplify(const Expr& e);

// Simultaneous substitution; variables for which lookup returns nullptr are
// left untouched.
Expr substitute(const Expr& e, const std::function<const Expr*(VarId)>& lookup);

bool depends_on(const Expr& e, VarKind kind);
bool depends_on(const Expr& e, VarId v);

// Central difference with step h.
double fd_derivative(const Expr& e, VarId v, const Env& env, double h);
// Central difference with the default step 1e-5 * max(1, |v|).
double fd_derivative(const Expr& e, VarId v, const Env& env);

}  // namespace kccjet::expr

template <>
struct std::hash<kccjet::expr::Expr> {
  std::size_t operator()(const kccjet::expr::Expr& e) const noexcept { return e.hash(); }
};
