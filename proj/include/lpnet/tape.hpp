#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpnet/params.hpp"
#include "lpnet/tensor.hpp"

namespace lpnet {

enum class OpKind : std::uint8_t {
  kInput,
  kParam,
  kAdd,
  kMul,
  kScale,
  kTanh,
  kSigmoid,
  kConcat,
  kSlice,
  kMatVec,
  kMatVecT,
  kMatMatNT,
  kAddRowVec,
  kRow,
  kStackRows,
  kPick,
  kSum,
  kSoftmax,
  kLogSoftmax,
  kLogSumExp,      // one vector input -> scalar
  kLogSumExpArgs,  // n scalar inputs -> scalar
};

const char* op_name(OpKind kind);

/// One recorded operation: kind, input node ids, the computed value, and the
/// small payloads some kinds need (row index, slice bounds, scale factor).
struct TapeNode {
  OpKind kind;
  std::vector<int> inputs;
  Tensor value;  // empty for kParam: the value lives in the ParamStore
  int i0 = 0;
  int i1 = 0;
  double d0 = 0.0;
};

/// Dynamic computation graph for one example. Nodes are appended in
/// topological order; backward() walks them once in reverse.
class Tape {
 public:
  explicit Tape(const ParamStore* params = nullptr) : params_(params) {}

  // Leaves.
  int input(Tensor value);
  int constant(double v) { return input(Tensor::scalar(v)); }
  int param(int param_index);

  // Operations.
  int add(int a, int b);
  int mul(int a, int b);
  int scale(int a, double s);
  int tanh(int a);
  int sigmoid(int a);
  int concat(const std::vector<int>& parts);
  int slice(int a, int offset, int len);
  int matvec(int w, int x);
  int matvec_t(int w, int x);
  int matmat_nt(int a, int b);
  int add_rowvec(int m, int v);
  int row(int m, int r);
  int stack_rows(const std::vector<int>& rows);
  int pick(int v, int index);
  int sum(int a);
  int softmax(int v);
  int log_softmax(int v);
  int logsumexp(int v);
  int logsumexp_args(const std::vector<int>& terms);

  /// Generic entry for payload-free kinds; dispatches to the typed builders.
  int forward_op(OpKind kind, const std::vector<int>& inputs);

  const Tensor& value(int id) const;
  double scalar_value(int id) const;
  std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep from a scalar loss node. Parameter gradients are
  /// accumulated into `grads` (indexed like the ParamStore); per-node
  /// gradients stay readable through grad() until the tape is mutated.
  void backward(int loss_id, GradStore* grads);
  const Tensor& grad(int id) const;
  bool has_grad(int id) const;
  std::size_t last_backward_visits() const { return last_visits_; }

  /// When enabled, every op result is checked for NaN/Inf.
  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  int push(TapeNode node);
  const Tensor& in(const TapeNode& node, std::size_t slot) const;
  [[noreturn]] void fail(OpKind kind, const std::string& detail) const;
  void check_vector(OpKind kind, int id) const;
  void check_same_shape(OpKind kind, int a, int b) const;

  std::vector<TapeNode> nodes_;
  std::vector<Tensor> grads_;
  const ParamStore* params_ = nullptr;
  std::size_t last_visits_ = 0;
  bool check_finite_ = false;
};

}  // namespace lpnet
