#include "lpnet/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpnet::kernels {

void add(const Tensor& a, const Tensor& b, Tensor& out) {
  out.shape = a.shape;
  out.data.resize(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
}

void mul(const Tensor& a, const Tensor& b, Tensor& out) {
  out.shape = a.shape;
  out.data.resize(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
}

void scale(const Tensor& a, double s, Tensor& out) {
  out.shape = a.shape;
  out.data.resize(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * s;
}

void tanh(const Tensor& a, Tensor& out) {
  out.shape = a.shape;
  out.data.resize(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = std::tanh(a.data[i]);
}

void sigmoid(const Tensor& a, Tensor& out) {
  out.shape = a.shape;
  out.data.resize(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = 1.0 / (1.0 + std::exp(-a.data[i]));
}

void concat(const std::vector<const Tensor*>& parts, Tensor& out) {
  std::size_t n = 0;
  for (const Tensor* p : parts) n += p->data.size();
  out.shape = {static_cast<int>(n)};
  out.data.clear();
  out.data.reserve(n);
  for (const Tensor* p : parts) out.data.insert(out.data.end(), p->data.begin(), p->data.end());
}

void slice(const Tensor& a, int offset, int len, Tensor& out) {
  out.shape = {len};
  out.data.assign(a.data.begin() + offset, a.data.begin() + offset + len);
}

void matvec(const Tensor& w, const Tensor& x, Tensor& out) {
  const int m = w.rows(), n = w.cols();
  out.shape = {m};
  out.data.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double* row = &w.data[static_cast<std::size_t>(i) * n];
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += row[j] * x.data[j];
    out.data[static_cast<std::size_t>(i)] = acc;
  }
}

void matvec_t(const Tensor& w, const Tensor& x, Tensor& out) {
  const int m = w.rows(), n = w.cols();
  out.shape = {n};
  out.data.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < m; ++i) {
    const double* row = &w.data[static_cast<std::size_t>(i) * n];
    const double xi = x.data[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) out.data[static_cast<std::size_t>(j)] += xi * row[j];
  }
}

void matmat_nt(const Tensor& a, const Tensor& b, Tensor& out) {
  const int m = a.rows(), k = a.cols(), n = b.rows();
  out.shape = {m, n};
  out.data.assign(static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * k];
    for (int j = 0; j < n; ++j) {
      const double* brow = &b.data[static_cast<std::size_t>(j) * k];
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += arow[t] * brow[t];
      out.data[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

void add_rowvec(const Tensor& m, const Tensor& v, Tensor& out) {
  const int rows = m.rows(), cols = m.cols();
  out.shape = m.shape;
  out.data.resize(m.data.size());
  for (int i = 0; i < rows; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) out.data[base + j] = m.data[base + j] + v.data[j];
  }
}

void softmax(const Tensor& x, Tensor& out) {
  out.shape = x.shape;
  out.data.resize(x.data.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x.data) mx = std::max(mx, v);
  double z = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    out.data[i] = std::exp(x.data[i] - mx);
    z += out.data[i];
  }
  for (double& v : out.data) v /= z;
}

void log_softmax(const Tensor& x, Tensor& out) {
  out.shape = x.shape;
  out.data.resize(x.data.size());
  const double lse = logsumexp(x);
  for (std::size_t i = 0; i < x.data.size(); ++i) out.data[i] = x.data[i] - lse;
}

double logsumexp(const Tensor& x) { return logsumexp(x.data); }

double logsumexp(const std::vector<double>& xs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : xs) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;  // all -inf
  double acc = 0.0;
  for (double v : xs) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

double sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data) acc += v;
  return acc;
}

}  // namespace lpnet::kernels
