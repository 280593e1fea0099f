#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "orl/encoders.hpp"
#include "orl/gradcheck.hpp"
#include "orl/graph.hpp"
#include "orl/params.hpp"

using namespace orl;
using namespace orl::nn;

namespace {

Mat rand_mat(std::mt19937_64& rng, int r, int c, double range = 0.5) {
  std::uniform_real_distribution<double> dist(-range, range);
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("parameter init is deterministic and order independent") {
  ParamStore a(42), b(42);
  a.ensure("x", 4, 3, Init::glorot);
  a.ensure("y", 2, 2, Init::uniform);
  b.ensure("y", 2, 2, Init::uniform);  // reversed creation order
  b.ensure("x", 4, 3, Init::glorot);
  CHECK(a.get("x").value == b.get("x").value);
  CHECK(a.get("y").value == b.get("y").value);
  ParamStore c(43);
  c.ensure("x", 4, 3, Init::glorot);
  CHECK(a.get("x").value != c.get("x").value);
}

TEST_CASE("param store json round-trip preserves values") {
  ParamStore a(1);
  a.ensure("w", 3, 5, Init::glorot);
  a.ensure("b", 3, 1, Init::uniform);
  ParamStore b = ParamStore::from_json(a.to_json());
  CHECK(a.get("w").value == b.get("w").value);
  CHECK(a.get("b").value == b.get("b").value);
  CHECK_THROWS_AS(b.require("missing", 1, 1), Error);
}

TEST_CASE("basic op gradients agree with finite differences") {
  std::mt19937_64 rng(3);
  ParamStore store(3);
  Param& w = store.ensure("w", 4, 6, Init::glorot);
  Param& b = store.ensure("b", 4, 1, Init::uniform);
  const Mat x = rand_mat(rng, 6, 1);
  const Mat probe = rand_mat(rng, 4, 1);

  SUBCASE("linear layer is exact to 1e-6") {
    double err = grad_check(
        [&](Tape& t) {
          return dot(t.constant(probe),
                     add(matmul(t.param(w), t.constant(x)), t.param(b)));
        },
        store.all());
    CHECK(err < 1e-6);
  }
  SUBCASE("tanh mlp") {
    Param& w2 = store.ensure("w2", 1, 4, Init::glorot);
    double err = grad_check(
        [&](Tape& t) {
          Expr hid = tanh(add(matmul(t.param(w), t.constant(x)), t.param(b)));
          return matmul(t.param(w2), hid);
        },
        store.all());
    CHECK(err < 1e-4);
  }
  SUBCASE("mixed ops") {
    Param& v = store.ensure("v", 5, 1, Init::uniform);
    double err = grad_check(
        [&](Tape& t) {
          Expr a = t.param(v);
          Expr s = softmax(a);
          Expr z = concat({leaky_relu(rows(a, 0, 3), 0.01), sigmoid(rows(a, 2, 3))});
          Expr m = emax({z, scale(z, -0.5)});
          return add(add(pick(s, 2), sum_elems(cmult(m, m))),
                     add(squared_norm(a), dot(softplus(a), a)));
        },
        store.all());
    CHECK(err < 1e-4);
  }
  SUBCASE("reshape transpose and smul") {
    double err = grad_check(
        [&](Tape& t) {
          Expr m = reshape(transpose(t.param(w)), 8, 3);
          Expr s = pick(t.param(b), 1);
          return sum_elems(tanh(smul(s, m)));
        },
        store.all());
    CHECK(err < 1e-4);
  }
}

TEST_CASE("gradients accumulate when an expr is reused") {
  ParamStore store(5);
  Param& v = store.ensure("v", 3, 1, Init::uniform);
  Tape t;
  Expr p = t.param(v);
  Expr y = add(dot(p, p), sum_elems(p));  // dy/dv = 2v + 1
  t.backward(y);
  Mat expect = 2.0 * v.value + Mat::Ones(3, 1);
  CHECK((v.grad - expect).norm() < 1e-12);
}

TEST_CASE("masked values carry zero gradient") {
  ParamStore store(6);
  Param& v = store.ensure("v", 5, 1, Init::uniform);
  Tape t;
  Expr logits = t.param(v);
  Expr lp = log_softmax(gather(logits, {0, 2, 4}));
  t.backward(neg(pick(lp, 1)));
  CHECK(v.grad(1, 0) == 0.0);
  CHECK(v.grad(3, 0) == 0.0);
  CHECK(v.grad(2, 0) != 0.0);
}

TEST_CASE("bilstm output has both directions") {
  std::mt19937_64 rng(8);
  ParamStore store(8);
  BiLstm enc = BiLstm::wire(store, "enc", 3, 4, false);
  Tape t;
  std::vector<Expr> xs = {t.constant(rand_mat(rng, 3, 1))};
  auto hs = enc.encode(t, xs);
  REQUIRE(hs.size() == 1);
  CHECK(hs[0].rows() == 8);
}

TEST_CASE("bilstm with tied directions mirrors reversed input") {
  std::mt19937_64 rng(9);
  ParamStore store(9);
  BiLstm enc = BiLstm::wire(store, "enc", 3, 4, false);
  // tie the directions so reversal symmetry is exact
  store.get("enc.bwd.wx").value = store.get("enc.fwd.wx").value;
  store.get("enc.bwd.wh").value = store.get("enc.fwd.wh").value;
  store.get("enc.bwd.b").value = store.get("enc.fwd.b").value;
  std::vector<Mat> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(rand_mat(rng, 3, 1));

  Tape t;
  std::vector<Expr> fwd_in, rev_in;
  for (const auto& x : xs) fwd_in.push_back(t.constant(x));
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) rev_in.push_back(t.constant(*it));
  auto h = enc.encode(t, fwd_in);
  auto hr = enc.encode(t, rev_in);
  for (int i = 0; i < 5; ++i) {
    const Mat& a = h[i].val();
    const Mat& b = hr[4 - i].val();
    // forward half of one run equals backward half of the reversed run
    CHECK((a.topRows(4) - b.bottomRows(4)).norm() < 1e-12);
    CHECK((a.bottomRows(4) - b.topRows(4)).norm() < 1e-12);
  }
}

TEST_CASE("stack encoder pops rewind to the previous state") {
  std::mt19937_64 rng(10);
  ParamStore store(10);
  LstmCell cell = LstmCell::wire(store, "stack", 3, 4, false);
  Param& empty = store.ensure("stack.empty", 4, 1, Init::uniform);
  const Mat a = rand_mat(rng, 3, 1), b = rand_mat(rng, 3, 1);

  Tape t;
  StackEncoder se(t, cell, empty);
  Expr empty_summary = se.summary();
  se.push(t.constant(a));
  Expr after_a = se.summary();
  se.push(t.constant(b));
  se.pop();
  CHECK((se.summary().val() - after_a.val()).norm() == 0.0);
  se.pop();
  CHECK((se.summary().val() - empty_summary.val()).norm() == 0.0);
  CHECK_THROWS_WITH_AS(se.pop(), doctest::Contains("PopOnEmpty"), Error);
}

TEST_CASE("stack encoder summary depends only on surviving contents") {
  std::mt19937_64 rng(11);
  ParamStore store(11);
  LstmCell cell = LstmCell::wire(store, "stack", 3, 4, false);
  Param& empty = store.ensure("stack.empty", 4, 1, Init::uniform);
  for (int it = 0; it < 50; ++it) {
    // random push/pop script, then replay only the survivors
    std::vector<Mat> values;
    for (int i = 0; i < 8; ++i) values.push_back(rand_mat(rng, 3, 1));
    Tape t;
    StackEncoder se(t, cell, empty);
    std::vector<int> surviving;
    for (int step = 0; step < 20; ++step) {
      if (se.size() > 0 && rng() % 3 == 0) {
        se.pop();
        surviving.pop_back();
      } else {
        int v = static_cast<int>(rng() % values.size());
        se.push(t.constant(values[v]));
        surviving.push_back(v);
      }
    }
    StackEncoder fresh(t, cell, empty);
    for (int v : surviving) fresh.push(t.constant(values[v]));
    CHECK((se.summary().val() - fresh.summary().val()).norm() == 0.0);
  }
}

TEST_CASE("char cnn handles one-character words via padding") {
  ParamStore store(12);
  CharCnn cnn = CharCnn::wire(store, "cnn", 4, 6, {2, 2, 2}, false);
  Tape t;
  std::vector<int> one = {3};
  Expr out = cnn.encode(t, one);
  CHECK(out.rows() == 6);
  // determinism: same input, same output
  Expr again = cnn.encode(t, one);
  CHECK((out.val() - again.val()).norm() == 0.0);
}

TEST_CASE("char cnn gradient check") {
  std::mt19937_64 rng(13);
  ParamStore store(13);
  CharCnn cnn = CharCnn::wire(store, "cnn", 4, 6, {2, 2, 2}, false);
  const Mat probe = rand_mat(rng, 6, 1);
  const std::vector<int> ids = {1, 4, 2, 5, 3};
  double err = grad_check(
      [&](Tape& t) { return dot(t.constant(probe), cnn.encode(t, ids)); },
      store.all());
  CHECK(err < 1e-4);
}

TEST_CASE("lstm step gradient check") {
  std::mt19937_64 rng(14);
  ParamStore store(14);
  LstmCell cell = LstmCell::wire(store, "cell", 3, 4, false);
  const Mat x = rand_mat(rng, 3, 1);
  const Mat probe = rand_mat(rng, 4, 1);
  double err = grad_check(
      [&](Tape& t) {
        auto [h1, c1] = cell.step(t, t.constant(x), t.zeros(4), t.zeros(4));
        auto [h2, c2] = cell.step(t, t.constant(x), h1, c1);
        return dot(t.constant(probe), h2);
      },
      store.all());
  CHECK(err < 1e-4);
}

TEST_CASE("stack encoder gradient check through a push pop script") {
  std::mt19937_64 rng(15);
  ParamStore store(15);
  LstmCell cell = LstmCell::wire(store, "stack", 3, 4, false);
  Param& empty = store.ensure("stack.empty", 4, 1, Init::uniform);
  const Mat a = rand_mat(rng, 3, 1), b = rand_mat(rng, 3, 1),
            c = rand_mat(rng, 3, 1);
  const Mat probe = rand_mat(rng, 4, 1);
  double err = grad_check(
      [&](Tape& t) {
        StackEncoder se(t, cell, empty);
        se.push(t.constant(a));
        se.push(t.constant(b));
        se.pop();
        se.push(t.constant(c));
        return dot(t.constant(probe), se.summary());
      },
      store.all());
  CHECK(err < 1e-4);
}

TEST_CASE("gradcheck detects a corrupted analytic gradient") {
  ParamStore store(16);
  Param& w = store.ensure("w", 2, 2, Init::glorot);
  GradCheckOptions opts;
  opts.corrupt = 0.5;
  double err = grad_check(
      [&](Tape& t) { return squared_norm(t.param(w)); }, store.all(), opts);
  CHECK(err > 1e-2);
}

TEST_CASE("adam reduces a simple quadratic") {
  ParamStore store(17);
  Param& w = store.ensure("w", 3, 1, Init::uniform);
  AdamTrainer trainer;
  trainer.learning_rate = 0.05;
  double first = 0;
  for (int step = 0; step < 200; ++step) {
    Tape t;
    Expr loss = squared_norm(t.param(w));
    if (step == 0) first = loss.scalar();
    t.backward(loss);
    trainer.step(store);
  }
  Tape t;
  CHECK(squared_norm(t.param(w)).scalar() < 0.01 * first);
}

TEST_CASE("fixed seeds give bit-identical forward results") {
  for (int round = 0; round < 2; ++round) {
    ParamStore s1(77), s2(77);
    BiLstm e1 = BiLstm::wire(s1, "enc", 3, 4, false);
    BiLstm e2 = BiLstm::wire(s2, "enc", 3, 4, false);
    std::mt19937_64 rng(7);
    Mat x = rand_mat(rng, 3, 1);
    Tape t1, t2;
    std::vector<Expr> in1 = {t1.constant(x)}, in2 = {t2.constant(x)};
    CHECK(e1.encode(t1, in1)[0].val() == e2.encode(t2, in2)[0].val());
  }
}
