#include <array>
#include <cctype>
#include <charconv>
#include <numbers>

#include "node.hpp"

namespace kccjet::expr {

namespace {

constexpr std::array kFunctions{Fn::Sin, Fn::Cos, Fn::Tan, Fn::Exp, Fn::Log,
                                Fn::Sqrt, Fn::Atan, Fn::Sinh, Fn::Cosh, Fn::Tanh};

// Recursive-descent parser.
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | variable | fn '(' expr ')' | '(' expr ')'
// A minus sign directly in front of a bare numeric literal yields a negative
// constant, so printed negative constants parse back to the same node.
class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = Expr::raw_binary(Op::Add, lhs, term());
      else if (accept('-'))
        lhs = Expr::raw_binary(Op::Sub, lhs, term());
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = Expr::raw_binary(Op::Mul, lhs, unary());
      else if (accept('/'))
        lhs = Expr::raw_binary(Op::Div, lhs, unary());
      else
        return lhs;
    }
  }

  Expr unary() {
    if (!accept('-')) return power();
    if (starts_number()) {
      std::size_t save = pos_;
      double v = number();
      if (peek() != '^') return Expr::constant(-v);
      pos_ = save;
    }
    return Expr::raw_neg(unary());
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::raw_binary(Op::Pow, base, unary());
    return base;
  }

  bool starts_number() {
    char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }

  double number() {
    skip_ws();
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  Expr primary() {
    if (starts_number()) return Expr::constant(number());
    if (accept('(')) {
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::string_view id = src_.substr(start, pos_ - start);
    if (id.empty()) {
      if (pos_ >= src_.size()) fail("unexpected end of input");
      fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    }
    for (Fn f : kFunctions) {
      if (id == fn_name(f)) {
        if (!accept('(')) fail("expected '(' after " + std::string(id));
        Expr a = expr();
        if (!accept(')')) fail("expected ')'");
        return Expr::raw_apply(f, a);
      }
    }
    if (id == "t") return Expr::var(VarId::time());
    if (id == "pi") return Expr::constant(std::numbers::pi);
    if ((id[0] == 'x' || id[0] == 'y') && id.size() > 1) {
      std::string_view digits = id.substr(1);
      int index = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec == std::errc() && ptr == digits.data() + digits.size()) {
        if (index < 1 || index > dim_) {
          pos_ = start;
          fail("index out of range in '" + std::string(id) + "' (dimension " + std::to_string(dim_) + ")");
        }
        return Expr::var(id[0] == 'x' ? VarId::x(index) : VarId::y(index));
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(id) + "'");
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Const:
      return e.value() < 0.0 ? 3 : 5;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

void format_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

void print_into(std::string& out, const Expr& e, int min_prec);

void print_child(std::string& out, const Expr& e, int min_prec) {
  if (precedence(e) < min_prec) {
    out += '(';
    print_into(out, e, 0);
    out += ')';
  } else {
    print_into(out, e, min_prec);
  }
}

void print_into(std::string& out, const Expr& e, int /*min_prec*/) {
  switch (e.op()) {
    case Op::Const:
      format_number(out, e.value());
      return;
    case Op::Var:
      out += to_string(e.var_id());
      return;
    case Op::Add:
    case Op::Sub:
      print_child(out, e.arg(0), 1);
      out += e.op() == Op::Add ? " + " : " - ";
      print_child(out, e.arg(1), 2);
      return;
    case Op::Mul:
    case Op::Div:
      print_child(out, e.arg(0), 2);
      out += e.op() == Op::Mul ? "*" : "/";
      print_child(out, e.arg(1), 3);
      return;
    case Op::Pow:
      print_child(out, e.arg(0), 5);
      out += "^";
      print_child(out, e.arg(1), 3);
      return;
    case Op::Neg:
      out += '-';
      if (e.arg(0).is_const() && e.arg(0).value() >= 0.0) {
        out += '(';
        print_into(out, e.arg(0), 0);
        out += ')';
      } else {
        print_child(out, e.arg(0), 3);
      }
      return;
    case Op::Apply:
      out += fn_name(e.fn());
      out += '(';
      print_into(out, e.arg(0), 0);
      out += ')';
      return;
    case Op::Inverse:
      out += "inverse";
      out += std::to_string(e.inverse_component() + 1);
      out += '(';
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) out += ", ";
        print_into(out, e.arg(i), 0);
      }
      out += ')';
      return;
  }
}

}  // namespace

Expr parse(std::string_view src, int dim) { return Parser(src, dim).run(); }

std::string print(const Expr& e) {
  std::string out;
  print_into(out, e, 0);
  return out;
}

}  // namespace kccjet::expr
