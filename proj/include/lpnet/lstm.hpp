#pragma once

#include <string>

#include "lpnet/tape.hpp"
#include "lpnet/tensor.hpp"

namespace lpnet {

/// Parameter handle for one LSTM cell. The weight matrix packs the four
/// gates row-wise as [input; forget; output; candidate], each `hidden` rows,
/// and acts on the concatenation [x; h_prev].
struct LstmParams {
  int w = -1;  // (4*hidden, input+hidden)
  int b = -1;  // (4*hidden)
  int input_dim = 0;
  int hidden_dim = 0;
};

LstmParams add_lstm_params(ParamStore& params, const std::string& prefix, int input_dim,
                           int hidden_dim);

struct LstmState {
  int h = -1;
  int c = -1;
};

/// Zero initial state as tape inputs.
LstmState lstm_initial_state(Tape& tape, int hidden_dim);

/// One recurrent update. Pure function of (params, x, prev).
LstmState lstm_step(Tape& tape, const LstmParams& p, int w_node, int b_node, int x, LstmState prev);

/// Value-only counterpart used by decoding; updates the state in place.
void lstm_step_values(const Tensor& w, const Tensor& b, const Tensor& x, Tensor& h, Tensor& c);

}  // namespace lpnet
