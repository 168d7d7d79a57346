#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpnet {

/// Error type for every failure surfaced by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major tensor of 64-bit floats. Scalars are shape {1}.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros(std::vector<int> shape);
  static Tensor scalar(double v);
  static Tensor from(std::vector<double> values);  // rank-1
  static Tensor matrix(int rows, int cols);

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  bool is_vector() const { return rank() == 1; }
  bool is_matrix() const { return rank() == 2; }
  bool is_scalar() const { return rank() == 1 && shape[0] == 1; }
  int rows() const { return shape.at(0); }
  int cols() const { return shape.at(1); }

  double& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }

  bool all_finite() const;
  std::string shape_str() const;  // e.g. "(3,4)"
};

}  // namespace lpnet
