#include "lpnet/lstm.hpp"

#include <cmath>

#include "lpnet/kernels.hpp"

namespace lpnet {

LstmParams add_lstm_params(ParamStore& params, const std::string& prefix, int input_dim,
                           int hidden_dim) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w = params.add(prefix + ".W", Tensor::matrix(4 * hidden_dim, input_dim + hidden_dim));
  p.b = params.add(prefix + ".b", Tensor::zeros({4 * hidden_dim}));
  return p;
}

LstmState lstm_initial_state(Tape& tape, int hidden_dim) {
  LstmState s;
  s.h = tape.input(Tensor::zeros({hidden_dim}));
  s.c = tape.input(Tensor::zeros({hidden_dim}));
  return s;
}

LstmState lstm_step(Tape& tape, const LstmParams& p, int w_node, int b_node, int x,
                    LstmState prev) {
  const int h = p.hidden_dim;
  const int xh = tape.concat({x, prev.h});
  const int gates = tape.add(tape.matvec(w_node, xh), b_node);
  const int gi = tape.sigmoid(tape.slice(gates, 0, h));
  const int gf = tape.sigmoid(tape.slice(gates, h, h));
  const int go = tape.sigmoid(tape.slice(gates, 2 * h, h));
  const int gu = tape.tanh(tape.slice(gates, 3 * h, h));
  LstmState next;
  next.c = tape.add(tape.mul(gf, prev.c), tape.mul(gi, gu));
  next.h = tape.mul(go, tape.tanh(next.c));
  return next;
}

void lstm_step_values(const Tensor& w, const Tensor& b, const Tensor& x, Tensor& h, Tensor& c) {
  namespace k = lpnet::kernels;
  const int hd = h.shape.at(0);
  Tensor xh, gates, tmp;
  k::concat({&x, &h}, xh);
  k::matvec(w, xh, tmp);
  k::add(tmp, b, gates);
  Tensor gi, gf, go, gu, part;
  k::slice(gates, 0, hd, part);
  k::sigmoid(part, gi);
  k::slice(gates, hd, hd, part);
  k::sigmoid(part, gf);
  k::slice(gates, 2 * hd, hd, part);
  k::sigmoid(part, go);
  k::slice(gates, 3 * hd, hd, part);
  k::tanh(part, gu);
  Tensor fc, iu, nc;
  k::mul(gf, c, fc);
  k::mul(gi, gu, iu);
  k::add(fc, iu, nc);
  Tensor tc;
  k::tanh(nc, tc);
  Tensor nh;
  k::mul(go, tc, nh);
  h = std::move(nh);
  c = std::move(nc);
}

}  // namespace lpnet
