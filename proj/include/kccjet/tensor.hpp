#pragma once

// Dense row-major tensor with a runtime shape. Indices are 0-based; index
// i stores the component the mathematical notation labels i+1. Axis order
// follows the written index order, e.g. R^i_{pqj} is stored as (i, p, q, j).

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "kccjet/expr.hpp"

namespace kccjet {

template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, const T& fill = T{})
      : shape_(std::move(shape)),
        data_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>{}), fill) {}

  static Tensor cube(std::size_t rank, std::size_t extent, const T& fill = T{}) {
    return Tensor(std::vector<std::size_t>(rank, extent), fill);
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  template <class... I>
  T& operator()(I... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  T& at(const std::vector<std::size_t>& idx) { return data_[offset(idx)]; }
  const T& at(const std::vector<std::size_t>& idx) const { return data_[offset(idx)]; }

  // Multi-index of the flat position k.
  std::vector<std::size_t> unravel(std::size_t k) const {
    std::vector<std::size_t> idx(shape_.size());
    for (std::size_t a = shape_.size(); a-- > 0;) {
      idx[a] = k % shape_[a];
      k /= shape_[a];
    }
    return idx;
  }

  template <class F>
  auto map(F&& f) const -> Tensor<decltype(f(std::declval<const T&>()))> {
    Tensor<decltype(f(std::declval<const T&>()))> out(shape_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data()[k] = f(data_[k]);
    return out;
  }

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape_.size()) throw std::out_of_range("tensor rank mismatch");
    std::size_t k = 0, a = 0;
    for (std::size_t i : idx) {
      if (i >= shape_[a]) throw std::out_of_range("tensor index out of range");
      k = k * shape_[a++] + i;
    }
    return k;
  }
  std::size_t offset(const std::vector<std::size_t>& idx) const {
    if (idx.size() != shape_.size()) throw std::out_of_range("tensor rank mismatch");
    std::size_t k = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] >= shape_[a]) throw std::out_of_range("tensor index out of range");
      k = k * shape_[a] + idx[a];
    }
    return k;
  }

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

using ExprTensor = Tensor<expr::Expr>;
using NumTensor = Tensor<double>;

NumTensor evaluate(const ExprTensor& t, const expr::Env& env);
ExprTensor simplify(const ExprTensor& t);
double max_abs(const NumTensor& t);

}  // namespace kccjet
