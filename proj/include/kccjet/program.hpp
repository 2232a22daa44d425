#pragma once

// Flattened evaluation tape for a batch of expressions. Structurally equal
// subtrees are computed once. Programs are immutable after compilation and
// may be evaluated concurrently; each call uses its own scratch registers.

#include <span>
#include <unordered_map>
#include <vector>

#include "kccjet/expr.hpp"

namespace kccjet::expr {

class Program {
 public:
  Program() = default;
  explicit Program(std::span<const Expr> outputs);

  std::size_t outputs() const { return outputs_.size(); }
  std::size_t instructions() const { return code_.size(); }

  // Writes one value per output; throws EvalError like eval().
  void run(const Env& env, std::span<double> out) const;
  std::vector<double> run(const Env& env) const;

 private:
  struct Instr {
    Op op = Op::Const;
    int a = -1;
    int b = -1;
    double value = 0.0;
    VarId var{};
    Fn fn = Fn::Sin;
    Expr source;  // Inverse nodes only
    std::vector<int> inverse_args;
  };

  int emit(const Expr& e, std::unordered_map<Expr, int>& seen);

  std::vector<Instr> code_;
  std::vector<int> outputs_;
};

}  // namespace kccjet::expr
