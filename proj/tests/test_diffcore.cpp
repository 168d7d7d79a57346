#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "lpnet/checkpoint.hpp"
#include "lpnet/kernels.hpp"
#include "lpnet/lstm.hpp"
#include "lpnet/tape.hpp"
#include "test_util.hpp"

using namespace lpnet;
using lpnet::testing::finite_diff_check;
using lpnet::testing::rel_err;

namespace {

ParamStore random_params(const std::vector<std::pair<std::string, std::vector<int>>>& specs,
                         std::uint64_t seed) {
  ParamStore ps;
  for (const auto& [name, shape] : specs) ps.add(name, Tensor::zeros(shape));
  std::mt19937_64 rng(seed);
  init_uniform(ps, -0.7, 0.7, rng);
  return ps;
}

}  // namespace

TEST_CASE("elementwise op values") {
  Tape tape;
  const int zero = tape.input(Tensor::from({0.0}));
  CHECK(tape.value(tape.tanh(zero))[0] == doctest::Approx(0.0));

  const int two = tape.input(Tensor::from({0.0, 0.0}));
  const Tensor& sm = tape.value(tape.softmax(two));
  CHECK(sm[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sm[1] == doctest::Approx(0.5).epsilon(1e-12));

  const int probs = tape.input(Tensor::from({std::log(0.3), std::log(0.7)}));
  CHECK(tape.scalar_value(tape.logsumexp(probs)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("softmax normalization and log_softmax consistency") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = Tensor::zeros({9});
    lpnet::testing::fill_uniform(x, rng, -4.0, 4.0);
    Tape tape;
    const int xin = tape.input(x);
    const Tensor& sm = tape.value(tape.softmax(xin));
    const Tensor& lsm = tape.value(tape.log_softmax(xin));
    double total = 0.0;
    for (int i = 0; i < 9; ++i) {
      CHECK(sm[i] > 0.0);
      total += sm[i];
      CHECK(std::abs(std::exp(lsm[i]) - sm[i]) <= 1e-12);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("shape mismatch errors name the op") {
  Tape tape;
  const int a = tape.input(Tensor::from({1.0, 2.0}));
  const int b = tape.input(Tensor::from({1.0, 2.0, 3.0}));
  CHECK_THROWS_WITH_AS(tape.add(a, b), doctest::Contains("add"), Error);
  const int m = tape.input(Tensor::matrix(2, 4));
  CHECK_THROWS_WITH_AS(tape.matvec(m, b), doctest::Contains("matvec"), Error);
}

TEST_CASE("backward of a linear form is the input") {
  ParamStore ps;
  const int w = ps.add("w", Tensor::from({3.0, 4.0}));
  Tape tape(&ps);
  const int wn = tape.param(w);
  const int xn = tape.input(Tensor::from({1.0, 2.0}));
  const int loss = tape.sum(tape.mul(wn, xn));
  GradStore grads(ps);
  tape.backward(loss, &grads);
  CHECK(grads.grad(w)[0] == doctest::Approx(1.0));
  CHECK(grads.grad(w)[1] == doctest::Approx(2.0));
  CHECK(tape.last_backward_visits() == tape.size());
}

TEST_CASE("backward requires a scalar loss") {
  Tape tape;
  const int v = tape.input(Tensor::from({1.0, 2.0}));
  CHECK_THROWS_AS(tape.backward(v, nullptr), Error);
}

TEST_CASE("gradient of logsumexp at equal inputs is uniform") {
  Tape tape;
  const int x = tape.input(Tensor::from({1.37, 1.37}));
  const int y = tape.logsumexp(x);
  tape.backward(y, nullptr);
  CHECK(tape.grad(x)[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tape.grad(x)[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("parameters off the loss path get zero gradient") {
  ParamStore ps;
  const int used = ps.add("used", Tensor::from({2.0}));
  const int unused = ps.add("unused", Tensor::from({5.0}));
  Tape tape(&ps);
  const int loss = tape.scale(tape.param(used), 3.0);
  GradStore grads(ps);
  tape.backward(loss, &grads);
  CHECK(grads.grad(used)[0] == doctest::Approx(3.0));
  CHECK(grads.grad(unused)[0] == 0.0);
}

// Finite-difference oracle over every differentiable op kind.
TEST_CASE("finite differences validate every op kind") {
  auto ps = random_params(
      {
          {"W", {4, 3}},
          {"M", {3, 5}},
          {"u", {3}},
          {"v", {3}},
          {"s", {4}},
          {"row_src", {4, 3}},
      },
      42);

  auto build = [&](Tape& tape) {
    const int W = tape.param(ps.require("W"));
    const int M = tape.param(ps.require("M"));
    const int u = tape.param(ps.require("u"));
    const int v = tape.param(ps.require("v"));
    const int s = tape.param(ps.require("s"));
    const int R = tape.param(ps.require("row_src"));

    const int uv = tape.mul(u, v);                       // mul
    const int t1 = tape.tanh(uv);                        // tanh
    const int t2 = tape.sigmoid(tape.add(u, v));         // add, sigmoid
    const int mv = tape.matvec(W, t1);                   // matvec (4)
    const int mt = tape.matvec_t(W, tape.add(mv, s));    // matvec_t (3)
    const int cc = tape.concat({t2, mt});                // concat (6)
    const int sl = tape.slice(cc, 1, 4);                 // slice (4)
    const int mm = tape.matmat_nt(W, tape.stack_rows({mt, tape.row(R, 2)}));  // (4,2)
    const int ar = tape.add_rowvec(mm, tape.slice(sl, 0, 2));
    const int sm = tape.softmax(sl);
    const int ls = tape.log_softmax(sl);
    const int lse = tape.logsumexp(sl);
    const int pk = tape.pick(ls, 2);
    const int lsa = tape.logsumexp_args({pk, lse, tape.pick(sm, 0)});
    const int total =
        tape.add(tape.add(tape.sum(ar), tape.sum(sm)), tape.add(lsa, tape.scale(pk, 0.3)));
    return total;
  };

  Tape tape(&ps);
  const int loss = build(tape);
  GradStore grads(ps);
  tape.backward(loss, &grads);

  const auto rep = finite_diff_check(ps, grads, [&]() {
    Tape t(&ps);
    return t.scalar_value(build(t));
  });
  CAPTURE(rep.worst_param);
  CAPTURE(rep.analytic);
  CAPTURE(rep.numeric);
  CHECK(rep.max_rel <= 1e-4);
}

TEST_CASE("lstm_step: zero weights and zero state give zero hidden") {
  ParamStore ps;
  Tape tape(&ps);
  LstmParams p;
  p.input_dim = 3;
  p.hidden_dim = 2;
  p.w = ps.add("lstm.W", Tensor::matrix(8, 5));
  p.b = ps.add("lstm.b", Tensor::zeros({8}));
  const int x = tape.input(Tensor::from({0.3, -1.2, 4.0}));
  const auto s0 = lstm_initial_state(tape, 2);
  const auto s1 = lstm_step(tape, p, tape.param(p.w), tape.param(p.b), x, s0);
  CHECK(tape.value(s1.h)[0] == doctest::Approx(0.0));
  CHECK(tape.value(s1.h)[1] == doctest::Approx(0.0));
}

TEST_CASE("lstm_step matches scalar hand evaluation of the gate equations") {
  // 2-unit cell, 1-d input. Weight rows: [i;f;o;u], columns [x, h0, h1].
  ParamStore ps;
  Tensor w = Tensor::matrix(8, 3);
  const double wv[8][3] = {
      {0.5, -0.1, 0.2},  // i0
      {-0.3, 0.4, 0.1},  // i1
      {0.2, 0.2, -0.5},  // f0
      {0.1, -0.2, 0.3},  // f1
      {-0.4, 0.5, 0.0},  // o0
      {0.6, 0.1, -0.1},  // o1
      {0.3, -0.3, 0.2},  // u0
      {-0.2, 0.2, 0.4},  // u1
  };
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 3; ++c) w.at(r, c) = wv[r][c];
  Tensor b = Tensor::from({0.01, -0.02, 0.03, 0.04, -0.05, 0.06, 0.07, -0.08});
  LstmParams p;
  p.input_dim = 1;
  p.hidden_dim = 2;
  p.w = ps.add("lstm.W", w);
  p.b = ps.add("lstm.b", b);

  const double x = 0.7;
  const double h0 = 0.2, h1 = -0.3, c0 = 0.5, c1 = -0.1;

  Tape tape(&ps);
  const int xn = tape.input(Tensor::from({x}));
  LstmState prev;
  prev.h = tape.input(Tensor::from({h0, h1}));
  prev.c = tape.input(Tensor::from({c0, c1}));
  const auto next = lstm_step(tape, p, tape.param(p.w), tape.param(p.b), xn, prev);

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  auto gate = [&](int r) { return wv[r][0] * x + wv[r][1] * h0 + wv[r][2] * h1 + b[r]; };
  const double i0 = sig(gate(0)), i1 = sig(gate(1));
  const double f0 = sig(gate(2)), f1 = sig(gate(3));
  const double o0 = sig(gate(4)), o1 = sig(gate(5));
  const double u0 = std::tanh(gate(6)), u1 = std::tanh(gate(7));
  const double nc0 = f0 * c0 + i0 * u0, nc1 = f1 * c1 + i1 * u1;
  const double nh0 = o0 * std::tanh(nc0), nh1 = o1 * std::tanh(nc1);

  CHECK(tape.value(next.c)[0] == doctest::Approx(nc0).epsilon(1e-12));
  CHECK(tape.value(next.c)[1] == doctest::Approx(nc1).epsilon(1e-12));
  CHECK(tape.value(next.h)[0] == doctest::Approx(nh0).epsilon(1e-12));
  CHECK(tape.value(next.h)[1] == doctest::Approx(nh1).epsilon(1e-12));

  // Value-only path must agree bit-for-bit with the tape path.
  Tensor h = Tensor::from({h0, h1});
  Tensor c = Tensor::from({c0, c1});
  lstm_step_values(ps.tensor(p.w), ps.tensor(p.b), Tensor::from({x}), h, c);
  CHECK(h[0] == tape.value(next.h)[0]);
  CHECK(h[1] == tape.value(next.h)[1]);
  CHECK(c[0] == tape.value(next.c)[0]);
  CHECK(c[1] == tape.value(next.c)[1]);
}

TEST_CASE("lstm_step is deterministic across repeats") {
  auto ps = random_params({{"l.W", {12, 7}}, {"l.b", {12}}}, 3);
  LstmParams p;
  p.input_dim = 4;
  p.hidden_dim = 3;
  p.w = ps.require("l.W");
  p.b = ps.require("l.b");
  std::vector<double> first;
  for (int rep = 0; rep < 2; ++rep) {
    Tape tape(&ps);
    const int x = tape.input(Tensor::from({0.1, 0.2, 0.3, 0.4}));
    auto s = lstm_initial_state(tape, 3);
    for (int step = 0; step < 3; ++step)
      s = lstm_step(tape, p, tape.param(p.w), tape.param(p.b), x, s);
    if (rep == 0) {
      first = tape.value(s.h).data;
    } else {
      CHECK(tape.value(s.h).data == first);
    }
  }
}

TEST_CASE("lstm gradients pass finite differences") {
  auto ps = random_params({{"l.W", {12, 7}}, {"l.b", {12}}, {"probe", {3}}}, 11);
  LstmParams p;
  p.input_dim = 4;
  p.hidden_dim = 3;
  p.w = ps.require("l.W");
  p.b = ps.require("l.b");
  auto build = [&](Tape& tape) {
    const int x = tape.input(Tensor::from({0.9, -0.6, 0.2, 0.05}));
    auto s = lstm_initial_state(tape, 3);
    for (int step = 0; step < 4; ++step)
      s = lstm_step(tape, p, tape.param(p.w), tape.param(p.b), x, s);
    return tape.sum(tape.mul(s.h, tape.param(ps.require("probe"))));
  };
  Tape tape(&ps);
  GradStore grads(ps);
  tape.backward(build(tape), &grads);
  const auto rep = finite_diff_check(ps, grads, [&]() {
    Tape t(&ps);
    return t.scalar_value(build(t));
  });
  CAPTURE(rep.worst_param);
  CHECK(rep.max_rel <= 1e-4);
}

TEST_CASE("adadelta: zero gradient leaves parameters, decays accumulators") {
  ParamStore ps;
  const int w = ps.add("w", Tensor::from({1.5}));
  AdaDelta opt(0.95, 1e-6);
  opt.init(ps);
  opt.grad_sq()[0][0] = 0.4;
  opt.delta_sq()[0][0] = 0.2;
  GradStore grads(ps);
  opt.step(ps, grads);
  CHECK(ps.tensor(w)[0] == doctest::Approx(1.5));
  CHECK(opt.grad_sq()[0][0] == doctest::Approx(0.95 * 0.4).epsilon(1e-12));
  CHECK(opt.delta_sq()[0][0] == doctest::Approx(0.95 * 0.2).epsilon(1e-12));
}

TEST_CASE("adadelta first-step magnitude matches the closed form") {
  ParamStore ps;
  const int w = ps.add("w", Tensor::from({0.0}));
  const double rho = 0.95, eps = 1e-6;
  AdaDelta opt(rho, eps);
  opt.init(ps);
  GradStore grads(ps);
  grads.grad(w)[0] = 1.0;
  opt.step(ps, grads);
  const double expected = std::sqrt(eps / (0.05 + eps));
  CHECK(std::abs(std::abs(ps.tensor(w)[0]) - expected) <= 1e-12);

  // Second identical gradient: step magnitude must not shrink.
  const double first = std::abs(ps.tensor(w)[0]);
  const double before = ps.tensor(w)[0];
  opt.step(ps, grads);
  CHECK(std::abs(ps.tensor(w)[0] - before) >= first);
}

TEST_CASE("gradient clipping rescales to the requested norm") {
  ParamStore ps;
  ps.add("a", Tensor::from({3.0, 4.0}));
  GradStore g(ps);
  g.grad(0)[0] = 30.0;
  g.grad(0)[1] = 40.0;
  const double norm = clip_global_norm(g, 5.0);
  CHECK(norm == doctest::Approx(50.0));
  CHECK(g.global_norm() == doctest::Approx(5.0));
  const double small = clip_global_norm(g, 100.0);
  CHECK(small == doctest::Approx(5.0));
  CHECK(g.global_norm() == doctest::Approx(5.0));  // below the cap: untouched
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  auto ps = random_params({{"emb", {5, 3}}, {"w.out", {4}}}, 99);
  AdaDelta opt(0.95, 1e-6);
  opt.init(ps);
  opt.grad_sq()[0][2] = 0.123456789123456789;
  nlohmann::json meta = {{"config_digest", "abc123"}, {"step", 17}};
  const std::string path = "ckpt_test.bin";
  save_checkpoint(path, ps, meta, &opt);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.meta["config_digest"] == "abc123");
  CHECK(loaded.meta["step"] == 17);
  REQUIRE(loaded.params.size() == ps.size());
  for (int i = 0; i < ps.size(); ++i) {
    const int j = loaded.params.require(ps.name(i));
    CHECK(loaded.params.tensor(j).shape == ps.tensor(i).shape);
    CHECK(loaded.params.tensor(j).data == ps.tensor(i).data);  // bitwise
  }
  REQUIRE(loaded.has_optimizer());
  CHECK(loaded.opt_grad_sq[0].data == opt.grad_sq()[0].data);
  std::remove(path.c_str());
}
