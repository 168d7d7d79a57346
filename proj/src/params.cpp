#include "lpnet/params.hpp"

#include <cmath>

namespace lpnet {

int ParamStore::add(const std::string& name, Tensor t) {
  if (index_.count(name)) throw Error("ParamStore: duplicate parameter '" + name + "'");
  const int idx = static_cast<int>(tensors_.size());
  names_.push_back(name);
  tensors_.push_back(std::move(t));
  index_[name] = idx;
  return idx;
}

int ParamStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : it->second;
}

int ParamStore::require(std::string_view name) const {
  const int idx = find(name);
  if (idx < 0) throw Error("ParamStore: missing parameter '" + std::string(name) + "'");
  return idx;
}

std::int64_t ParamStore::total_elements() const {
  std::int64_t n = 0;
  for (const Tensor& t : tensors_) n += t.numel();
  return n;
}

void init_uniform(ParamStore& params, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (int i = 0; i < params.size(); ++i) {
    for (double& v : params.tensor(i).data) v = dist(rng);
  }
}

GradStore::GradStore(const ParamStore& params) {
  grads_.reserve(static_cast<std::size_t>(params.size()));
  for (int i = 0; i < params.size(); ++i) grads_.push_back(Tensor::zeros(params.tensor(i).shape));
}

void GradStore::zero() {
  for (Tensor& g : grads_) std::fill(g.data.begin(), g.data.end(), 0.0);
}

void GradStore::add(const GradStore& other) {
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    Tensor& a = grads_[i];
    const Tensor& b = other.grads_[i];
    for (std::size_t j = 0; j < a.data.size(); ++j) a.data[j] += b.data[j];
  }
}

void GradStore::scale(double s) {
  for (Tensor& g : grads_) {
    for (double& v : g.data) v *= s;
  }
}

double GradStore::global_norm() const {
  double sq = 0.0;
  for (const Tensor& g : grads_) {
    for (double v : g.data) sq += v * v;
  }
  return std::sqrt(sq);
}

double clip_global_norm(GradStore& grads, double max_norm) {
  const double norm = grads.global_norm();
  if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
  return norm;
}

void AdaDelta::init(const ParamStore& params) {
  grad_sq_.clear();
  delta_sq_.clear();
  for (int i = 0; i < params.size(); ++i) {
    grad_sq_.push_back(Tensor::zeros(params.tensor(i).shape));
    delta_sq_.push_back(Tensor::zeros(params.tensor(i).shape));
  }
}

void AdaDelta::step(ParamStore& params, const GradStore& grads) {
  if (grad_sq_.size() != static_cast<std::size_t>(params.size()))
    throw Error("AdaDelta: not initialized for this parameter store");
  for (int i = 0; i < params.size(); ++i) {
    Tensor& p = params.tensor(i);
    const Tensor& g = grads.grad(i);
    Tensor& eg = grad_sq_[static_cast<std::size_t>(i)];
    Tensor& ed = delta_sq_[static_cast<std::size_t>(i)];
    if (g.shape != p.shape) throw Error("AdaDelta: gradient shape mismatch for " + params.name(i));
    for (std::size_t j = 0; j < p.data.size(); ++j) {
      const double gj = g.data[j];
      eg.data[j] = rho_ * eg.data[j] + (1.0 - rho_) * gj * gj;
      const double dx = -std::sqrt((ed.data[j] + eps_) / (eg.data[j] + eps_)) * gj;
      ed.data[j] = rho_ * ed.data[j] + (1.0 - rho_) * dx * dx;
      p.data[j] += dx;
    }
  }
}

}  // namespace lpnet
