#pragma once

// Primitive dense kernels. The autodiff tape and the value-only decoding path
// both call these, so the two paths produce identical arithmetic.

#include <vector>

#include "lpnet/tensor.hpp"

namespace lpnet::kernels {

void add(const Tensor& a, const Tensor& b, Tensor& out);
void mul(const Tensor& a, const Tensor& b, Tensor& out);
void scale(const Tensor& a, double s, Tensor& out);
void tanh(const Tensor& a, Tensor& out);
void sigmoid(const Tensor& a, Tensor& out);
void concat(const std::vector<const Tensor*>& parts, Tensor& out);
void slice(const Tensor& a, int offset, int len, Tensor& out);

// y = W x, W (m,n), x (n) -> (m)
void matvec(const Tensor& w, const Tensor& x, Tensor& out);
// y = W^T x, W (m,n), x (m) -> (n)
void matvec_t(const Tensor& w, const Tensor& x, Tensor& out);
// C = A B^T, A (m,k), B (n,k) -> (m,n)
void matmat_nt(const Tensor& a, const Tensor& b, Tensor& out);
// out[i,:] = M[i,:] + v
void add_rowvec(const Tensor& m, const Tensor& v, Tensor& out);

void softmax(const Tensor& x, Tensor& out);
void log_softmax(const Tensor& x, Tensor& out);
double logsumexp(const Tensor& x);
double logsumexp(const std::vector<double>& xs);
double sum(const Tensor& x);

}  // namespace lpnet::kernels
