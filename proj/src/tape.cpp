#include "lpnet/tape.hpp"

#include <cmath>

#include "lpnet/kernels.hpp"

namespace lpnet {

namespace {
namespace k = lpnet::kernels;
}

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kParam: return "param";
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kMatVec: return "matvec";
    case OpKind::kMatVecT: return "matvec_t";
    case OpKind::kMatMatNT: return "matmat_nt";
    case OpKind::kAddRowVec: return "add_rowvec";
    case OpKind::kRow: return "row";
    case OpKind::kStackRows: return "stack_rows";
    case OpKind::kPick: return "pick";
    case OpKind::kSum: return "sum";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kLogSumExp: return "logsumexp";
    case OpKind::kLogSumExpArgs: return "logsumexp_args";
  }
  return "?";
}

void Tape::fail(OpKind kind, const std::string& detail) const {
  throw Error(std::string("tape op '") + op_name(kind) + "': " + detail);
}

const Tensor& Tape::in(const TapeNode& node, std::size_t slot) const {
  return value(node.inputs[slot]);
}

const Tensor& Tape::value(int id) const {
  const TapeNode& n = nodes_[static_cast<std::size_t>(id)];
  if (n.kind == OpKind::kParam) return params_->tensor(n.i0);
  return n.value;
}

double Tape::scalar_value(int id) const {
  const Tensor& t = value(id);
  if (!t.is_scalar()) throw Error("tape: node is not scalar, shape " + t.shape_str());
  return t.data[0];
}

int Tape::push(TapeNode node) {
  if (check_finite_ && node.kind != OpKind::kParam && !node.value.all_finite())
    fail(node.kind, "non-finite value produced");
  nodes_.push_back(std::move(node));
  grads_.clear();  // node grads from any earlier backward are invalid now
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Tensor value) {
  TapeNode n;
  n.kind = OpKind::kInput;
  n.value = std::move(value);
  return push(std::move(n));
}

int Tape::param(int param_index) {
  if (!params_) throw Error("tape: param() without a bound ParamStore");
  TapeNode n;
  n.kind = OpKind::kParam;
  n.i0 = param_index;
  return push(std::move(n));
}

void Tape::check_vector(OpKind kind, int id) const {
  if (!value(id).is_vector()) fail(kind, "expected vector, got " + value(id).shape_str());
}

void Tape::check_same_shape(OpKind kind, int a, int b) const {
  if (value(a).shape != value(b).shape)
    fail(kind, "shape mismatch " + value(a).shape_str() + " vs " + value(b).shape_str());
}

int Tape::add(int a, int b) {
  check_same_shape(OpKind::kAdd, a, b);
  TapeNode n;
  n.kind = OpKind::kAdd;
  n.inputs = {a, b};
  k::add(value(a), value(b), n.value);
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  check_same_shape(OpKind::kMul, a, b);
  TapeNode n;
  n.kind = OpKind::kMul;
  n.inputs = {a, b};
  k::mul(value(a), value(b), n.value);
  return push(std::move(n));
}

int Tape::scale(int a, double s) {
  TapeNode n;
  n.kind = OpKind::kScale;
  n.inputs = {a};
  n.d0 = s;
  k::scale(value(a), s, n.value);
  return push(std::move(n));
}

int Tape::tanh(int a) {
  TapeNode n;
  n.kind = OpKind::kTanh;
  n.inputs = {a};
  k::tanh(value(a), n.value);
  return push(std::move(n));
}

int Tape::sigmoid(int a) {
  TapeNode n;
  n.kind = OpKind::kSigmoid;
  n.inputs = {a};
  k::sigmoid(value(a), n.value);
  return push(std::move(n));
}

int Tape::concat(const std::vector<int>& parts) {
  if (parts.empty()) fail(OpKind::kConcat, "no inputs");
  std::vector<const Tensor*> vs;
  vs.reserve(parts.size());
  for (int p : parts) {
    check_vector(OpKind::kConcat, p);
    vs.push_back(&value(p));
  }
  TapeNode n;
  n.kind = OpKind::kConcat;
  n.inputs = parts;
  k::concat(vs, n.value);
  return push(std::move(n));
}

int Tape::slice(int a, int offset, int len) {
  check_vector(OpKind::kSlice, a);
  const Tensor& v = value(a);
  if (offset < 0 || len <= 0 || offset + len > v.shape[0])
    fail(OpKind::kSlice, "bounds [" + std::to_string(offset) + "," + std::to_string(offset + len) +
                             ") outside " + v.shape_str());
  TapeNode n;
  n.kind = OpKind::kSlice;
  n.inputs = {a};
  n.i0 = offset;
  n.i1 = len;
  k::slice(v, offset, len, n.value);
  return push(std::move(n));
}

int Tape::matvec(int w, int x) {
  const Tensor& wv = value(w);
  const Tensor& xv = value(x);
  if (!wv.is_matrix() || !xv.is_vector() || wv.cols() != xv.shape[0])
    fail(OpKind::kMatVec, wv.shape_str() + " x " + xv.shape_str());
  TapeNode n;
  n.kind = OpKind::kMatVec;
  n.inputs = {w, x};
  k::matvec(wv, xv, n.value);
  return push(std::move(n));
}

int Tape::matvec_t(int w, int x) {
  const Tensor& wv = value(w);
  const Tensor& xv = value(x);
  if (!wv.is_matrix() || !xv.is_vector() || wv.rows() != xv.shape[0])
    fail(OpKind::kMatVecT, wv.shape_str() + "^T x " + xv.shape_str());
  TapeNode n;
  n.kind = OpKind::kMatVecT;
  n.inputs = {w, x};
  k::matvec_t(wv, xv, n.value);
  return push(std::move(n));
}

int Tape::matmat_nt(int a, int b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.is_matrix() || !bv.is_matrix() || av.cols() != bv.cols())
    fail(OpKind::kMatMatNT, av.shape_str() + " x " + bv.shape_str() + "^T");
  TapeNode n;
  n.kind = OpKind::kMatMatNT;
  n.inputs = {a, b};
  k::matmat_nt(av, bv, n.value);
  return push(std::move(n));
}

int Tape::add_rowvec(int m, int v) {
  const Tensor& mv = value(m);
  const Tensor& vv = value(v);
  if (!mv.is_matrix() || !vv.is_vector() || mv.cols() != vv.shape[0])
    fail(OpKind::kAddRowVec, mv.shape_str() + " + " + vv.shape_str());
  TapeNode n;
  n.kind = OpKind::kAddRowVec;
  n.inputs = {m, v};
  k::add_rowvec(mv, vv, n.value);
  return push(std::move(n));
}

int Tape::row(int m, int r) {
  const Tensor& mv = value(m);
  if (!mv.is_matrix() || r < 0 || r >= mv.rows())
    fail(OpKind::kRow, "row " + std::to_string(r) + " of " + mv.shape_str());
  TapeNode n;
  n.kind = OpKind::kRow;
  n.inputs = {m};
  n.i0 = r;
  k::slice(mv, r * mv.cols(), mv.cols(), n.value);
  return push(std::move(n));
}

int Tape::stack_rows(const std::vector<int>& rows) {
  if (rows.empty()) fail(OpKind::kStackRows, "no inputs");
  const int d = value(rows[0]).shape.at(0);
  for (int r : rows) {
    check_vector(OpKind::kStackRows, r);
    if (value(r).shape[0] != d)
      fail(OpKind::kStackRows, "row width mismatch " + value(r).shape_str());
  }
  TapeNode n;
  n.kind = OpKind::kStackRows;
  n.inputs = rows;
  n.value = Tensor::matrix(static_cast<int>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& rv = value(rows[i]);
    std::copy(rv.data.begin(), rv.data.end(), n.value.data.begin() + static_cast<long>(i) * d);
  }
  return push(std::move(n));
}

int Tape::pick(int v, int index) {
  const Tensor& vv = value(v);
  if (!vv.is_vector() || index < 0 || index >= vv.shape[0])
    fail(OpKind::kPick, "index " + std::to_string(index) + " of " + vv.shape_str());
  TapeNode n;
  n.kind = OpKind::kPick;
  n.inputs = {v};
  n.i0 = index;
  n.value = Tensor::scalar(vv.data[static_cast<std::size_t>(index)]);
  return push(std::move(n));
}

int Tape::sum(int a) {
  TapeNode n;
  n.kind = OpKind::kSum;
  n.inputs = {a};
  n.value = Tensor::scalar(k::sum(value(a)));
  return push(std::move(n));
}

int Tape::softmax(int v) {
  check_vector(OpKind::kSoftmax, v);
  TapeNode n;
  n.kind = OpKind::kSoftmax;
  n.inputs = {v};
  k::softmax(value(v), n.value);
  return push(std::move(n));
}

int Tape::log_softmax(int v) {
  check_vector(OpKind::kLogSoftmax, v);
  TapeNode n;
  n.kind = OpKind::kLogSoftmax;
  n.inputs = {v};
  k::log_softmax(value(v), n.value);
  return push(std::move(n));
}

int Tape::logsumexp(int v) {
  check_vector(OpKind::kLogSumExp, v);
  TapeNode n;
  n.kind = OpKind::kLogSumExp;
  n.inputs = {v};
  n.value = Tensor::scalar(k::logsumexp(value(v)));
  return push(std::move(n));
}

int Tape::logsumexp_args(const std::vector<int>& terms) {
  if (terms.empty()) fail(OpKind::kLogSumExpArgs, "no inputs");
  std::vector<double> xs;
  xs.reserve(terms.size());
  for (int t : terms) {
    if (!value(t).is_scalar())
      fail(OpKind::kLogSumExpArgs, "non-scalar input " + value(t).shape_str());
    xs.push_back(value(t).data[0]);
  }
  TapeNode n;
  n.kind = OpKind::kLogSumExpArgs;
  n.inputs = terms;
  n.value = Tensor::scalar(k::logsumexp(xs));
  return push(std::move(n));
}

int Tape::forward_op(OpKind kind, const std::vector<int>& inputs) {
  switch (kind) {
    case OpKind::kAdd: return add(inputs.at(0), inputs.at(1));
    case OpKind::kMul: return mul(inputs.at(0), inputs.at(1));
    case OpKind::kTanh: return tanh(inputs.at(0));
    case OpKind::kSigmoid: return sigmoid(inputs.at(0));
    case OpKind::kConcat: return concat(inputs);
    case OpKind::kMatVec: return matvec(inputs.at(0), inputs.at(1));
    case OpKind::kMatVecT: return matvec_t(inputs.at(0), inputs.at(1));
    case OpKind::kMatMatNT: return matmat_nt(inputs.at(0), inputs.at(1));
    case OpKind::kAddRowVec: return add_rowvec(inputs.at(0), inputs.at(1));
    case OpKind::kStackRows: return stack_rows(inputs);
    case OpKind::kSum: return sum(inputs.at(0));
    case OpKind::kSoftmax: return softmax(inputs.at(0));
    case OpKind::kLogSoftmax: return log_softmax(inputs.at(0));
    case OpKind::kLogSumExp: return logsumexp(inputs.at(0));
    case OpKind::kLogSumExpArgs: return logsumexp_args(inputs);
    default: fail(kind, "not constructible through forward_op");
  }
}

bool Tape::has_grad(int id) const {
  return static_cast<std::size_t>(id) < grads_.size() &&
         !grads_[static_cast<std::size_t>(id)].data.empty();
}

const Tensor& Tape::grad(int id) const {
  if (!has_grad(id)) throw Error("tape: node has no gradient (run backward first)");
  return grads_[static_cast<std::size_t>(id)];
}

void Tape::backward(int loss_id, GradStore* grads) {
  if (loss_id < 0 || static_cast<std::size_t>(loss_id) >= nodes_.size())
    throw Error("tape: bad loss node id");
  if (!value(loss_id).is_scalar())
    throw Error("tape: backward needs a scalar loss, got " + value(loss_id).shape_str());

  grads_.assign(nodes_.size(), Tensor{});
  grads_[static_cast<std::size_t>(loss_id)] = Tensor::scalar(1.0);
  last_visits_ = 0;

  auto touch = [&](int id) -> Tensor& {
    Tensor& g = grads_[static_cast<std::size_t>(id)];
    if (g.data.empty()) g = Tensor::zeros(value(id).shape);
    return g;
  };

  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    ++last_visits_;
    const TapeNode& n = nodes_[static_cast<std::size_t>(id)];
    const Tensor& g = grads_[static_cast<std::size_t>(id)];
    if (g.data.empty()) continue;  // not on any path to the loss

    switch (n.kind) {
      case OpKind::kInput:
        break;
      case OpKind::kParam:
        if (grads) {
          Tensor& out = grads->grad(n.i0);
          for (std::size_t j = 0; j < g.data.size(); ++j) out.data[j] += g.data[j];
        }
        break;
      case OpKind::kAdd: {
        for (int slot = 0; slot < 2; ++slot) {
          Tensor& d = touch(n.inputs[static_cast<std::size_t>(slot)]);
          for (std::size_t j = 0; j < g.data.size(); ++j) d.data[j] += g.data[j];
        }
        break;
      }
      case OpKind::kMul: {
        const Tensor& a = in(n, 0);
        const Tensor& b = in(n, 1);
        Tensor& da = touch(n.inputs[0]);
        Tensor& db = touch(n.inputs[1]);
        for (std::size_t j = 0; j < g.data.size(); ++j) {
          da.data[j] += g.data[j] * b.data[j];
          db.data[j] += g.data[j] * a.data[j];
        }
        break;
      }
      case OpKind::kScale: {
        Tensor& d = touch(n.inputs[0]);
        for (std::size_t j = 0; j < g.data.size(); ++j) d.data[j] += g.data[j] * n.d0;
        break;
      }
      case OpKind::kTanh: {
        Tensor& d = touch(n.inputs[0]);
        for (std::size_t j = 0; j < g.data.size(); ++j) {
          const double y = n.value.data[j];
          d.data[j] += g.data[j] * (1.0 - y * y);
        }
        break;
      }
      case OpKind::kSigmoid: {
        Tensor& d = touch(n.inputs[0]);
        for (std::size_t j = 0; j < g.data.size(); ++j) {
          const double y = n.value.data[j];
          d.data[j] += g.data[j] * y * (1.0 - y);
        }
        break;
      }
      case OpKind::kConcat: {
        std::size_t off = 0;
        for (int src : n.inputs) {
          Tensor& d = touch(src);
          for (std::size_t j = 0; j < d.data.size(); ++j) d.data[j] += g.data[off + j];
          off += d.data.size();
        }
        break;
      }
      case OpKind::kSlice: {
        Tensor& d = touch(n.inputs[0]);
        for (int j = 0; j < n.i1; ++j)
          d.data[static_cast<std::size_t>(n.i0 + j)] += g.data[static_cast<std::size_t>(j)];
        break;
      }
      case OpKind::kMatVec: {
        const Tensor& w = in(n, 0);
        const Tensor& x = in(n, 1);
        Tensor& dw = touch(n.inputs[0]);
        Tensor& dx = touch(n.inputs[1]);
        const int m = w.rows(), c = w.cols();
        for (int i = 0; i < m; ++i) {
          const double gi = g.data[static_cast<std::size_t>(i)];
          if (gi == 0.0) continue;
          const std::size_t base = static_cast<std::size_t>(i) * c;
          for (int j = 0; j < c; ++j) {
            dw.data[base + j] += gi * x.data[static_cast<std::size_t>(j)];
            dx.data[static_cast<std::size_t>(j)] += gi * w.data[base + j];
          }
        }
        break;
      }
      case OpKind::kMatVecT: {
        const Tensor& w = in(n, 0);
        const Tensor& x = in(n, 1);
        Tensor& dw = touch(n.inputs[0]);
        Tensor& dx = touch(n.inputs[1]);
        const int m = w.rows(), c = w.cols();
        for (int i = 0; i < m; ++i) {
          const std::size_t base = static_cast<std::size_t>(i) * c;
          const double xi = x.data[static_cast<std::size_t>(i)];
          double acc = 0.0;
          for (int j = 0; j < c; ++j) {
            dw.data[base + j] += xi * g.data[static_cast<std::size_t>(j)];
            acc += w.data[base + j] * g.data[static_cast<std::size_t>(j)];
          }
          dx.data[static_cast<std::size_t>(i)] += acc;
        }
        break;
      }
      case OpKind::kMatMatNT: {
        const Tensor& a = in(n, 0);
        const Tensor& b = in(n, 1);
        Tensor& da = touch(n.inputs[0]);
        Tensor& db = touch(n.inputs[1]);
        const int m = a.rows(), kk = a.cols(), nn = b.rows();
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < nn; ++j) {
            const double gij = g.data[static_cast<std::size_t>(i) * nn + j];
            if (gij == 0.0) continue;
            const std::size_t abase = static_cast<std::size_t>(i) * kk;
            const std::size_t bbase = static_cast<std::size_t>(j) * kk;
            for (int t = 0; t < kk; ++t) {
              da.data[abase + t] += gij * b.data[bbase + t];
              db.data[bbase + t] += gij * a.data[abase + t];
            }
          }
        }
        break;
      }
      case OpKind::kAddRowVec: {
        Tensor& dm = touch(n.inputs[0]);
        Tensor& dv = touch(n.inputs[1]);
        const int rows = n.value.rows(), cols = n.value.cols();
        for (int i = 0; i < rows; ++i) {
          const std::size_t base = static_cast<std::size_t>(i) * cols;
          for (int j = 0; j < cols; ++j) {
            dm.data[base + j] += g.data[base + j];
            dv.data[static_cast<std::size_t>(j)] += g.data[base + j];
          }
        }
        break;
      }
      case OpKind::kRow: {
        Tensor& d = touch(n.inputs[0]);
        const int c = in(n, 0).cols();
        const std::size_t base = static_cast<std::size_t>(n.i0) * c;
        for (int j = 0; j < c; ++j) d.data[base + j] += g.data[static_cast<std::size_t>(j)];
        break;
      }
      case OpKind::kStackRows: {
        const int c = n.value.cols();
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          Tensor& d = touch(n.inputs[i]);
          for (int j = 0; j < c; ++j) d.data[static_cast<std::size_t>(j)] += g.data[i * c + j];
        }
        break;
      }
      case OpKind::kPick: {
        Tensor& d = touch(n.inputs[0]);
        d.data[static_cast<std::size_t>(n.i0)] += g.data[0];
        break;
      }
      case OpKind::kSum: {
        Tensor& d = touch(n.inputs[0]);
        for (double& v : d.data) v += g.data[0];
        break;
      }
      case OpKind::kSoftmax: {
        Tensor& d = touch(n.inputs[0]);
        double dot = 0.0;
        for (std::size_t j = 0; j < g.data.size(); ++j) dot += g.data[j] * n.value.data[j];
        for (std::size_t j = 0; j < g.data.size(); ++j)
          d.data[j] += n.value.data[j] * (g.data[j] - dot);
        break;
      }
      case OpKind::kLogSoftmax: {
        Tensor& d = touch(n.inputs[0]);
        double gsum = 0.0;
        for (double v : g.data) gsum += v;
        for (std::size_t j = 0; j < g.data.size(); ++j)
          d.data[j] += g.data[j] - std::exp(n.value.data[j]) * gsum;
        break;
      }
      case OpKind::kLogSumExp: {
        Tensor& d = touch(n.inputs[0]);
        const Tensor& x = in(n, 0);
        const double y = n.value.data[0];
        for (std::size_t j = 0; j < d.data.size(); ++j)
          d.data[j] += g.data[0] * std::exp(x.data[j] - y);
        break;
      }
      case OpKind::kLogSumExpArgs: {
        const double y = n.value.data[0];
        for (int src : n.inputs) {
          Tensor& d = touch(src);
          d.data[0] += g.data[0] * std::exp(value(src).data[0] - y);
        }
        break;
      }
    }
  }
}

}  // namespace lpnet
