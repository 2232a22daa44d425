// Value-preserving normalization into a sum of monomials.
//
// Every expression is rewritten as  sum_k c_k * prod_j b_kj^e_kj  where the
// bases b are atoms (variables, function applications, implicit inverses,
// powers with symbolic exponents, or unexpanded sums). Like monomials are
// collected, which gives constant folding, 0/1 identities and x - x -> 0.
// Products of sums are distributed while the result stays below a size cap.

#include <map>
#include <unordered_map>
#include <utility>

#include "node.hpp"

namespace kccjet::expr {

namespace {

constexpr std::size_t kExpandLimit = 96;

using Factor = std::pair<Expr, double>;
using Monomial = std::vector<Factor>;  // sorted by base, exponents nonzero

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (int c = compare(a[i].first, b[i].first)) return c < 0;
      if (a[i].second != b[i].second) return a[i].second < b[i].second;
    }
    return a.size() < b.size();
  }
};

using Sum = std::map<Monomial, double, MonomialLess>;

void add_term(Sum& s, const Monomial& m, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = s.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) s.erase(it);
  }
}

Sum constant_sum(double c) {
  Sum s;
  add_term(s, {}, c);
  return s;
}

Monomial multiply_monomials(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    int c = i == a.size() ? 1 : j == b.size() ? -1 : compare(a[i].first, b[j].first);
    if (c < 0) {
      out.push_back(a[i++]);
    } else if (c > 0) {
      out.push_back(b[j++]);
    } else {
      double e = a[i].second + b[j].second;
      if (e != 0.0) out.emplace_back(a[i].first, e);
      ++i;
      ++j;
    }
  }
  return out;
}

Expr from_sum(const Sum& s);

Sum atom(const Expr& base, double exponent) {
  if (exponent == 0.0) return constant_sum(1.0);
  if (base.is_const()) {
    try {
      return constant_sum(apply_pow(base.value(), exponent));
    } catch (const EvalError&) {
      // keep the failing power so evaluation still reports it
    }
  }
  Sum s;
  s.emplace(Monomial{{base, exponent}}, 1.0);
  return s;
}

Sum multiply(const Sum& a, const Sum& b) {
  if (a.empty() || b.empty()) return {};
  if (a.size() > 1 && b.size() > 1 && a.size() * b.size() > kExpandLimit)
    return multiply(atom(from_sum(a), 1.0), atom(from_sum(b), 1.0));
  Sum out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) add_term(out, multiply_monomials(ma, mb), ca * cb);
  return out;
}

Sum reciprocal(const Sum& s) {
  if (s.empty()) return atom(Expr::constant(0.0), -1.0);
  if (s.size() == 1) {
    const auto& [m, c] = *s.begin();
    Monomial inv = m;
    for (auto& f : inv) f.second = -f.second;
    Sum out;
    out.emplace(std::move(inv), 1.0 / c);
    return out;
  }
  return atom(from_sum(s), -1.0);
}

Sum power(const Sum& s, double k) {
  if (k == 1.0) return s;
  if (k == 0.0) return constant_sum(1.0);
  if (s.empty()) return k > 0.0 ? Sum{} : atom(Expr::constant(0.0), k);
  const bool integral = is_integer(k);
  if (s.size() == 1) {
    const auto& [m, c] = *s.begin();
    if (integral || (c > 0.0 && m.empty())) {
      double ck = std::pow(c, k);
      if (std::isfinite(ck) && ck != 0.0) {
        Monomial mk = m;
        for (auto& f : mk) f.second *= k;
        Sum out;
        out.emplace(std::move(mk), ck);
        return out;
      }
    }
    if (c == 1.0 && m.size() == 1 && m[0].second == 1.0) return atom(m[0].first, k);
    return atom(from_sum(s), k);
  }
  if (integral && k >= 2.0 && k <= 4.0) {
    std::size_t size = s.size();
    bool small = true;
    for (int i = 1; i < static_cast<int>(k); ++i) {
      size *= s.size();
      if (size > kExpandLimit) small = false;
    }
    if (small) {
      Sum out = s;
      for (int i = 1; i < static_cast<int>(k); ++i) out = multiply(out, s);
      return out;
    }
  }
  return atom(from_sum(s), k);
}

Sum to_sum_uncached(const Expr& e);

// Shared subtrees are normalized once per top-level simplify call.
thread_local std::unordered_map<const Node*, Sum>* memo = nullptr;

Sum to_sum(const Expr& e) {
  if (e.op() == Op::Const || e.op() == Op::Var) return to_sum_uncached(e);
  if (auto it = memo->find(e.node()); it != memo->end()) return it->second;
  Sum s = to_sum_uncached(e);
  memo->emplace(e.node(), s);
  return s;
}

Sum to_sum_uncached(const Expr& e) {
  switch (e.op()) {
    case Op::Const:
      return constant_sum(e.value());
    case Op::Var:
      return atom(e, 1.0);
    case Op::Add:
    case Op::Sub: {
      Sum out = to_sum(e.arg(0));
      const double sign = e.op() == Op::Add ? 1.0 : -1.0;
      for (const auto& [m, c] : to_sum(e.arg(1))) add_term(out, m, sign * c);
      return out;
    }
    case Op::Neg: {
      Sum out = to_sum(e.arg(0));
      for (auto& [m, c] : out) c = -c;
      return out;
    }
    case Op::Mul:
      return multiply(to_sum(e.arg(0)), to_sum(e.arg(1)));
    case Op::Div:
      return multiply(to_sum(e.arg(0)), reciprocal(to_sum(e.arg(1))));
    case Op::Pow: {
      Sum base = to_sum(e.arg(0));
      Expr exponent = from_sum(to_sum(e.arg(1)));
      if (exponent.is_const()) return power(base, exponent.value());
      return atom(pow(from_sum(base), exponent), 1.0);
    }
    case Op::Apply: {
      Expr folded = apply(e.fn(), from_sum(to_sum(e.arg(0))));
      if (folded.is_const()) return constant_sum(folded.value());
      return atom(folded, 1.0);
    }
    case Op::Inverse: {
      std::vector<Expr> args;
      for (const auto& a : e.args()) args.push_back(from_sum(to_sum(a)));
      return atom(Expr::inverse(e.node()->inverse, e.inverse_component(), std::move(args)), 1.0);
    }
  }
  return {};
}

Expr factor_expr(const Factor& f, bool invert) {
  const double e = invert ? -f.second : f.second;
  return e == 1.0 ? f.first : pow(f.first, e);
}

// Magnitude part |c| * prod(positive) / prod(negative).
Expr term_expr(const Monomial& m, double magnitude) {
  Expr num;
  bool has_num = false;
  Expr den;
  bool has_den = false;
  for (const auto& f : m) {
    if (f.second > 0.0) {
      num = has_num ? num * factor_expr(f, false) : factor_expr(f, false);
      has_num = true;
    } else {
      den = has_den ? den * factor_expr(f, true) : factor_expr(f, true);
      has_den = true;
    }
  }
  Expr out;
  if (!has_num)
    out = Expr::constant(magnitude);
  else if (magnitude == 1.0)
    out = num;
  else
    out = Expr::raw_binary(Op::Mul, Expr::constant(magnitude), num);
  if (has_den) out = Expr::raw_binary(Op::Div, out, den);
  return out;
}

Expr from_sum(const Sum& s) {
  if (s.empty()) return 0.0;
  Expr acc;
  bool first = true;
  // Put the constant term last so sums read "x1 + 1".
  auto emit = [&](const Monomial& m, double c) {
    if (first) {
      first = false;
      if (m.empty()) {
        acc = Expr::constant(c);
      } else if (c < 0.0 && c != -1.0) {
        Expr t = term_expr(m, 1.0);
        // -2*x1 keeps the sign on the coefficient
        acc = t.op() == Op::Div && t.arg(0).is_const(1.0)
                  ? Expr::raw_binary(Op::Div, Expr::constant(c), t.arg(1))
                  : Expr::raw_binary(Op::Mul, Expr::constant(c), t);
      } else if (c == -1.0) {
        acc = Expr::raw_neg(term_expr(m, 1.0));
      } else {
        acc = term_expr(m, c);
      }
      return;
    }
    Expr t = term_expr(m, std::abs(c));
    acc = Expr::raw_binary(c < 0.0 ? Op::Sub : Op::Add, acc, t);
  };
  const auto constant = s.find(Monomial{});
  for (auto it = s.begin(); it != s.end(); ++it)
    if (it != constant) emit(it->first, it->second);
  if (constant != s.end()) emit(constant->first, constant->second);
  return acc;
}

}  // namespace

Expr simplify(const Expr& e) {
  std::unordered_map<const Node*, Sum> local;
  struct Reset {
    std::unordered_map<const Node*, Sum>* prev;
    ~Reset() { memo = prev; }
  } reset{memo};
  memo = &local;
  return from_sum(to_sum(e));
}

}  // namespace kccjet::expr
