#pragma once

#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lpnet/tensor.hpp"

namespace lpnet {

/// Named trainable arrays. Indices are stable for the life of the store and
/// order is the insertion order, which makes checkpoints deterministic.
class ParamStore {
 public:
  int add(const std::string& name, Tensor t);
  int find(std::string_view name) const;  // -1 if absent
  int require(std::string_view name) const;

  Tensor& tensor(int idx) { return tensors_[static_cast<std::size_t>(idx)]; }
  const Tensor& tensor(int idx) const { return tensors_[static_cast<std::size_t>(idx)]; }
  const std::string& name(int idx) const { return names_[static_cast<std::size_t>(idx)]; }
  int size() const { return static_cast<int>(tensors_.size()); }
  std::int64_t total_elements() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, int> index_;
};

/// Uniform init in [lo, hi] for every element of every parameter.
void init_uniform(ParamStore& params, double lo, double hi, std::mt19937_64& rng);

/// One gradient tensor per parameter, shape-aligned with a ParamStore.
class GradStore {
 public:
  GradStore() = default;
  explicit GradStore(const ParamStore& params);

  Tensor& grad(int idx) { return grads_[static_cast<std::size_t>(idx)]; }
  const Tensor& grad(int idx) const { return grads_[static_cast<std::size_t>(idx)]; }
  int size() const { return static_cast<int>(grads_.size()); }

  void zero();
  void add(const GradStore& other);
  void scale(double s);
  double global_norm() const;

 private:
  std::vector<Tensor> grads_;
};

/// Scales gradients so the global L2 norm is at most max_norm. Returns the
/// pre-clip norm.
double clip_global_norm(GradStore& grads, double max_norm);

/// AdaDelta (Zeiler 2012): learning-rate-free per-element updates.
class AdaDelta {
 public:
  AdaDelta(double rho, double eps) : rho_(rho), eps_(eps) {}

  void init(const ParamStore& params);
  void step(ParamStore& params, const GradStore& grads);

  double rho() const { return rho_; }
  double eps() const { return eps_; }
  std::vector<Tensor>& grad_sq() { return grad_sq_; }
  std::vector<Tensor>& delta_sq() { return delta_sq_; }
  const std::vector<Tensor>& grad_sq() const { return grad_sq_; }
  const std::vector<Tensor>& delta_sq() const { return delta_sq_; }

 private:
  double rho_;
  double eps_;
  std::vector<Tensor> grad_sq_;   // E[g^2]
  std::vector<Tensor> delta_sq_;  // E[dx^2]
};

}  // namespace lpnet
