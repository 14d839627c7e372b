#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "incdisf/autodiff.hpp"
#include "incdisf/layers.hpp"

using namespace incdisf;

namespace {

Parameter rand_param(const std::string& name, std::vector<int> shape, Rng& rng,
                     double scale = 1.0) {
    Tensor t = Tensor::zeros(shape);
    for (double& v : t.data) v = rng.normal() * scale;
    return Parameter(name, std::move(t));
}

}  // namespace

TEST_CASE("forward values match closed forms") {
    Tape t;
    CHECK(t.value(t.tanh(t.constant(Tensor::scalar(0.0))))[0] == 0.0);
    CHECK(t.value(t.sigmoid(t.constant(Tensor::scalar(0.0))))[0] == doctest::Approx(0.5));
    CHECK(t.value(t.logsumexp(t.constant(Tensor::vec({0.0, 0.0}))))[0] ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(t.value(t.sum(t.constant(Tensor::vec({1.0, 2.0, 3.5}))))[0] == doctest::Approx(6.5));

    auto sm = t.value(t.softmax(t.constant(Tensor::vec({1.0, 1.0, 1.0}))));
    for (double v : sm.data) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // -log softmax([0, ln 3])[1] = -ln(3/4)
    double nll = t.value(t.nll_softmax(t.constant(Tensor::vec({0.0, std::log(3.0)})), 1))[0];
    CHECK(nll == doctest::Approx(-std::log(0.75)).epsilon(1e-12));

    auto mm = t.value(t.matmul(t.constant(Tensor({2, 2}, {1, 2, 3, 4})),
                               t.constant(Tensor::vec({1.0, -1.0}))));
    CHECK(mm[0] == -1.0);
    CHECK(mm[1] == -1.0);

    auto cc = t.value(t.concat(t.constant(Tensor::vec({1})), t.constant(Tensor::vec({2, 3}))));
    CHECK(cc.data == std::vector<double>{1, 2, 3});
    auto sl = t.value(t.slice(t.constant(Tensor::vec({5, 6, 7, 8})), 1, 2));
    CHECK(sl.data == std::vector<double>{6, 7});
}

TEST_CASE("shape mismatches are rejected") {
    Tape t;
    Var a = t.constant(Tensor::vec({1, 2}));
    Var b = t.constant(Tensor::vec({1, 2, 3}));
    CHECK_THROWS_AS(t.add(a, b), ShapeError);
    CHECK_THROWS_AS(t.mul(a, b), ShapeError);
    CHECK_THROWS_AS(t.matmul(t.constant(Tensor({2, 3}, std::vector<double>(6, 0.0))), a),
                    ShapeError);
}

TEST_CASE("gradient of a simple composite matches the closed form") {
    // L = sum(tanh(W x)); dL/dW_ij = (1 - tanh^2((Wx)_i)) x_j
    Rng rng(1);
    Parameter w = rand_param("w", {3, 2}, rng, 0.5);
    Tensor x = Tensor::vec({0.7, -1.3});
    Tape t;
    Var loss = t.sum(t.tanh(t.matmul(t.param(w), t.constant(x))));
    w.zero_grad();
    t.backward(loss);
    for (int i = 0; i < 3; ++i) {
        double pre = w.value.at(i, 0) * x[0] + w.value.at(i, 1) * x[1];
        double d = 1.0 - std::tanh(pre) * std::tanh(pre);
        for (int j = 0; j < 2; ++j)
            CHECK(w.grad.at(i, j) == doctest::Approx(d * x[j]).epsilon(1e-12));
    }
}

TEST_CASE("gradients accumulate across reuse of a parameter") {
    Parameter p("p", Tensor::vec({2.0}));
    Tape t;
    Var v = t.param(p);
    Var loss = t.sum(t.mul(v, v));  // d/dp p^2 = 2p
    p.zero_grad();
    t.backward(loss);
    CHECK(p.grad[0] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("finite differences: elementwise ops and reductions") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Parameter a = rand_param("a", {5}, rng);
        Parameter b = rand_param("b", {5}, rng);
        auto loss_fn = [&]() {
            a.zero_grad();
            b.zero_grad();
            Tape t;
            Var va = t.param(a), vb = t.param(b);
            Var l = t.sum(t.mul(t.tanh(va), t.sigmoid(vb)));
            l = t.add(l, t.logsumexp(t.add(va, vb)));
            l = t.add(l, t.sum(t.exp(t.scale(vb, -0.5))));
            t.backward(l);
            return t.value(l)[0];
        };
        double err = gradient_check(loss_fn, {&a, &b}, 1e-4, 5, rng);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("finite differences: matmul, lookup, softmax nll") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        Parameter w = rand_param("w", {4, 3}, rng, 0.6);
        Parameter e = rand_param("e", {6, 3}, rng, 0.6);
        int row = static_cast<int>(rng.uniform_int(6));
        int gold = static_cast<int>(rng.uniform_int(4));
        auto loss_fn = [&]() {
            w.zero_grad();
            e.zero_grad();
            Tape t;
            Var x = t.lookup(t.param(e), row);
            Var logits = t.matmul(t.param(w), x);
            Var l = t.nll_softmax(logits, gold);
            t.backward(l);
            return t.value(l)[0];
        };
        double err = gradient_check(loss_fn, {&w, &e}, 1e-4, 6, rng);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("finite differences: crf_nll primitive") {
    Rng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        int T = 2 + static_cast<int>(rng.uniform_int(4));
        int L = 2 + static_cast<int>(rng.uniform_int(3));
        Parameter em("em", Tensor::zeros({T, L}));
        for (double& v : em.value.data) v = rng.normal();
        Parameter trans = rand_param("trans", {L, L}, rng, 0.7);
        Parameter start = rand_param("start", {L}, rng, 0.7);
        Parameter stop = rand_param("stop", {L}, rng, 0.7);
        std::vector<int> gold(T);
        for (int i = 0; i < T; ++i) gold[i] = static_cast<int>(rng.uniform_int(L));
        auto loss_fn = [&]() {
            em.zero_grad();
            trans.zero_grad();
            start.zero_grad();
            stop.zero_grad();
            Tape t;
            Var l = t.crf_nll(t.param(em), t.param(trans), t.param(start), t.param(stop), gold);
            t.backward(l);
            return t.value(l)[0];
        };
        double err = gradient_check(loss_fn, {&em, &trans, &start, &stop}, 1e-4, 8, rng);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("finite differences: LSTM step composite") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        LstmParams lstm(3, 4, rng);
        Parameter out = rand_param("out", {4}, rng);
        std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
        auto loss_fn = [&]() {
            for (Parameter* p : lstm.params()) p->zero_grad();
            out.zero_grad();
            Tape t;
            LstmVarState st{t.constant(Tensor::zeros({4})), t.constant(Tensor::zeros({4}))};
            Var wx = t.param(lstm.wx), wh = t.param(lstm.wh), b = t.param(lstm.b);
            st = lstm_step(t, t.constant(Tensor::vec(x)), st, lstm, wx, wh, b);
            st = lstm_step(t, t.constant(Tensor::vec(x)), st, lstm, wx, wh, b);
            Var l = t.sum(t.mul(st.h, t.param(out)));
            t.backward(l);
            return t.value(l)[0];
        };
        std::vector<Parameter*> ps = lstm.params();
        ps.push_back(&out);
        double err = gradient_check(loss_fn, ps, 1e-4, 6, rng);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("non-finite values are detected") {
    Tape t;
    CHECK_THROWS_AS(t.constant(Tensor::vec({1.0, std::nan("")})), NumericalError);
    Var big = t.constant(Tensor::vec({1e308}));
    CHECK_THROWS_AS(t.mul(big, big), NumericalError);
}
