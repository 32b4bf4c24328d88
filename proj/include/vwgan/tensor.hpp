#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "vwgan/errors.hpp"

namespace vwgan {

// Dense row-major float64 tensor. Gradient bookkeeping lives in the Tape,
// not here; a plain Tensor is just shape + data.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(check_numel(shape), 0.0) {}
  Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != check_numel(shape))
      throw ShapeError("tensor data size " + std::to_string(data.size()) +
                       " does not match shape (numel " + std::to_string(check_numel(shape)) + ")");
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, double v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  double& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  // Row pointer into a [B, C, T] tensor.
  double* row(int b, int c) {
    return data.data() + (static_cast<int64_t>(b) * shape[1] + c) * shape[2];
  }
  const double* row(int b, int c) const {
    return data.data() + (static_cast<int64_t>(b) * shape[1] + c) * shape[2];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  static int64_t check_numel(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) {
      if (d <= 0) throw ShapeError("non-positive dimension " + std::to_string(d));
      n *= d;
    }
    return n;
  }
};

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace vwgan
