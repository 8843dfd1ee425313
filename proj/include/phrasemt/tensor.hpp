#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "phrasemt/errors.hpp"

namespace phrasemt {

// Dense row-major tensor.  Rank 1 and 2 cover everything in this project;
// rank-2 tensors are (rows x cols).
template <typename T>
struct Tensor {
  std::vector<long> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<long> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(numel_of(shape)), T(0));
  }
  Tensor(std::vector<long> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<long>(data.size()) != numel_of(shape))
      throw ShapeError("tensor data size does not match shape");
  }

  static Tensor zeros(std::vector<long> s) { return Tensor(std::move(s)); }
  static Tensor scalar(T v) { return Tensor({1}, {v}); }
  static Tensor row(std::vector<T> d) {
    const long n = static_cast<long>(d.size());
    return Tensor({1, n}, std::move(d));
  }
  static Tensor vec(std::vector<T> d) {
    const long n = static_cast<long>(d.size());
    return Tensor({n}, std::move(d));
  }

  static long numel_of(const std::vector<long>& s) {
    long n = 1;
    for (long d : s) n *= d;
    return n;
  }

  long numel() const { return static_cast<long>(data.size()); }
  long rank() const { return static_cast<long>(shape.size()); }
  long rows() const { return rank() == 2 ? shape[0] : (rank() == 1 ? 1 : throw_rank()); }
  long cols() const { return rank() == 2 ? shape[1] : (rank() == 1 ? shape[0] : throw_rank()); }

  T& at(long i) { return data[static_cast<std::size_t>(i)]; }
  const T& at(long i) const { return data[static_cast<std::size_t>(i)]; }
  T& at(long r, long c) { return data[static_cast<std::size_t>(r * cols() + c)]; }
  const T& at(long r, long c) const { return data[static_cast<std::size_t>(r * cols() + c)]; }

  T* row_ptr(long r) { return data.data() + r * cols(); }
  const T* row_ptr(long r) const { return data.data() + r * cols(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (const T& x : data)
      if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  std::string shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << "]";
    return os.str();
  }

 private:
  [[noreturn]] long throw_rank() const { throw ShapeError("tensor rank unsupported here"); }
};

template <typename T>
inline void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace phrasemt
