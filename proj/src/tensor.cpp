#include "lpnet/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace lpnet {

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw Error("Tensor: non-positive dimension " + std::to_string(d));
    n *= d;
  }
  t.shape = std::move(shape);
  t.data.assign(static_cast<std::size_t>(n), 0.0);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.shape = {1};
  t.data = {v};
  return t;
}

Tensor Tensor::from(std::vector<double> values) {
  Tensor t;
  t.shape = {static_cast<int>(values.size())};
  t.data = std::move(values);
  return t;
}

Tensor Tensor::matrix(int rows, int cols) { return zeros({rows, cols}); }

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

}  // namespace lpnet
