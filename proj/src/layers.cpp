#include "incdisf/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace incdisf {

namespace {

Tensor glorot(int rows, int cols, Rng& rng) {
    Tensor t = Tensor::zeros({rows, cols});
    double r = std::sqrt(6.0 / (rows + cols));
    for (double& v : t.data) v = rng.uniform(-r, r);
    return t;
}

}  // namespace

LstmParams::LstmParams(int input_dim_, int hidden_, Rng& rng)
    : input_dim(input_dim_),
      hidden(hidden_),
      wx("lstm.wx", glorot(4 * hidden_, input_dim_, rng)),
      wh("lstm.wh", glorot(4 * hidden_, hidden_, rng)),
      b("lstm.b", Tensor::zeros({4 * hidden_})) {
    // Forget-gate bias starts at 1 so early training retains cell state.
    for (int i = hidden; i < 2 * hidden; ++i) b.value.data[i] = 1.0;
}

LstmVarState lstm_step(Tape& t, Var x, const LstmVarState& prev, LstmParams& p,
                       Var wx, Var wh, Var b) {
    int H = p.hidden;
    Var z = t.add(t.add(t.matmul(wx, x), t.matmul(wh, prev.h)), b);
    Var ig = t.sigmoid(t.slice(z, 0, H));
    Var fg = t.sigmoid(t.slice(z, H, H));
    Var gg = t.tanh(t.slice(z, 2 * H, H));
    Var og = t.sigmoid(t.slice(z, 3 * H, H));
    Var c = t.add(t.mul(fg, prev.c), t.mul(ig, gg));
    Var h = t.mul(og, t.tanh(c));
    return {h, c};
}

LstmState lstm_step_infer(const std::vector<double>& x, const LstmState& prev,
                          const LstmParams& p) {
    int H = p.hidden, D = p.input_dim;
    if (static_cast<int>(x.size()) != D) throw ShapeError("lstm_step_infer: input dim mismatch");
    if (static_cast<int>(prev.h.size()) != H || static_cast<int>(prev.c.size()) != H)
        throw ShapeError("lstm_step_infer: state dim mismatch");
    std::vector<double> z(4 * H);
    for (int i = 0; i < 4 * H; ++i) {
        double s = p.b.value.data[i];
        const double* wxr = &p.wx.value.data[static_cast<std::size_t>(i) * D];
        for (int j = 0; j < D; ++j) s += wxr[j] * x[j];
        const double* whr = &p.wh.value.data[static_cast<std::size_t>(i) * H];
        for (int j = 0; j < H; ++j) s += whr[j] * prev.h.data[j];
        z[i] = s;
    }
    LstmState out{Tensor::zeros({H}), Tensor::zeros({H})};
    for (int i = 0; i < H; ++i) {
        double ig = 1.0 / (1.0 + std::exp(-z[i]));
        double fg = 1.0 / (1.0 + std::exp(-z[H + i]));
        double gg = std::tanh(z[2 * H + i]);
        double og = 1.0 / (1.0 + std::exp(-z[3 * H + i]));
        out.c.data[i] = fg * prev.c.data[i] + ig * gg;
        out.h.data[i] = og * std::tanh(out.c.data[i]);
    }
    if (!out.c.all_finite() || !out.h.all_finite())
        throw NumericalError("lstm_step_infer produced non-finite state");
    return out;
}

Var ff_tanh(Tape& t, Var w, Var x) { return t.tanh(t.matmul(w, x)); }

Tensor ff_tanh_infer(const Parameter& w, const Tensor& x) {
    int m = w.value.shape[0], k = w.value.shape[1];
    if (static_cast<int>(x.size()) != k) throw ShapeError("ff_tanh_infer: dim mismatch");
    Tensor out = Tensor::zeros({m});
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        const double* row = &w.value.data[static_cast<std::size_t>(i) * k];
        for (int j = 0; j < k; ++j) s += row[j] * x.data[j];
        out.data[i] = std::tanh(s);
    }
    return out;
}

TaggingHead::TaggingHead(const std::string& name, int hidden, int ff_dim, int labels, Rng& rng)
    : num_labels(labels),
      ff_w(name + ".ff_w", glorot(ff_dim, hidden, rng)),
      emit_w(name + ".emit_w", glorot(labels, ff_dim, rng)),
      emit_b(name + ".emit_b", Tensor::zeros({labels})),
      trans(name + ".trans", Tensor::zeros({labels, labels})),
      start(name + ".start", Tensor::zeros({labels})),
      stop(name + ".stop", Tensor::zeros({labels})) {}

Tensor TaggingHead::emissions_row(const Tensor& h) const {
    Tensor d = ff_tanh_infer(ff_w, h);
    int L = num_labels, k = d.rows();
    Tensor out = Tensor::zeros({L});
    for (int i = 0; i < L; ++i) {
        double s = emit_b.value.data[i];
        const double* row = &emit_w.value.data[static_cast<std::size_t>(i) * k];
        for (int j = 0; j < k; ++j) s += row[j] * d.data[j];
        out.data[i] = s;
    }
    return out;
}

std::pair<std::vector<int>, double> crf_viterbi(const Tensor& emissions, const Tensor& trans,
                                                const Tensor& start, const Tensor& stop) {
    if (emissions.shape.size() != 2) throw ShapeError("crf_viterbi: emissions must be (T,L)");
    int T = emissions.shape[0], L = emissions.shape[1];
    if (T < 1) throw ShapeError("crf_viterbi: empty sequence");

    std::vector<double> score(L);
    for (int j = 0; j < L; ++j) score[j] = start.data[j] + emissions.at(0, j);
    std::vector<int> back(static_cast<std::size_t>(std::max(0, T - 1)) * L);
    std::vector<double> next(L);
    for (int t = 1; t < T; ++t) {
        for (int j = 0; j < L; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            int best_i = 0;
            for (int i = 0; i < L; ++i) {
                double s = score[i] + trans.at(i, j);
                if (s > best) {  // ties keep the lower previous label
                    best = s;
                    best_i = i;
                }
            }
            next[j] = best + emissions.at(t, j);
            back[static_cast<std::size_t>(t - 1) * L + j] = best_i;
        }
        score = next;
    }
    double best = -std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (int j = 0; j < L; ++j) {
        double s = score[j] + stop.data[j];
        if (s > best) {
            best = s;
            best_j = j;
        }
    }
    std::vector<int> path(T);
    path[T - 1] = best_j;
    for (int t = T - 1; t > 0; --t)
        path[t - 1] = back[static_cast<std::size_t>(t - 1) * L + path[t]];
    return {path, best};
}

std::pair<std::vector<int>, double> crf_viterbi(const Tensor& emissions, const TaggingHead& head) {
    return crf_viterbi(emissions, head.trans.value, head.start.value, head.stop.value);
}

double crf_path_score(const Tensor& emissions, const Tensor& trans, const Tensor& start,
                      const Tensor& stop, const std::vector<int>& path) {
    int T = emissions.shape[0];
    double s = start.data[path[0]] + emissions.at(0, path[0]);
    for (int t = 1; t < T; ++t) s += trans.at(path[t - 1], path[t]) + emissions.at(t, path[t]);
    return s + stop.data[path[T - 1]];
}

double crf_nll_value(const Tensor& emissions, const Tensor& trans, const Tensor& start,
                     const Tensor& stop, const std::vector<int>& gold) {
    int T = emissions.shape[0], L = emissions.shape[1];
    auto lse = [L](const std::vector<double>& x) {
        double m = *std::max_element(x.begin(), x.end());
        double s = 0.0;
        for (int i = 0; i < L; ++i) s += std::exp(x[i] - m);
        return m + std::log(s);
    };
    std::vector<double> alpha(L), next(L), work(L);
    for (int j = 0; j < L; ++j) alpha[j] = start.data[j] + emissions.at(0, j);
    for (int t = 1; t < T; ++t) {
        for (int j = 0; j < L; ++j) {
            for (int i = 0; i < L; ++i) work[i] = alpha[i] + trans.at(i, j);
            next[j] = lse(work) + emissions.at(t, j);
        }
        alpha = next;
    }
    for (int j = 0; j < L; ++j) work[j] = alpha[j] + stop.data[j];
    double log_z = lse(work);
    return log_z - crf_path_score(emissions, trans, start, stop, gold);
}

LmHead::LmHead(int hidden, int lm_dim_, int vocab, Rng& rng)
    : lm_dim(lm_dim_),
      wm("lm.wm", glorot(lm_dim_, hidden, rng)),
      m0("lm.m0", Tensor::zeros({lm_dim_})),
      wq("lm.wq", glorot(vocab, lm_dim_, rng)) {}

Tensor lm_step_infer(const Tensor& m_prev, const LmHead& head) {
    int V = head.wq.value.shape[0], M = head.wq.value.shape[1];
    if (static_cast<int>(m_prev.size()) != M) throw ShapeError("lm_step_infer: dim mismatch");
    Tensor logits = Tensor::zeros({V});
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < V; ++i) {
        double s = 0.0;
        const double* row = &head.wq.value.data[static_cast<std::size_t>(i) * M];
        for (int j = 0; j < M; ++j) s += row[j] * m_prev.data[j];
        logits.data[i] = s;
        mx = std::max(mx, s);
    }
    double z = 0.0;
    for (int i = 0; i < V; ++i) z += std::exp(logits.data[i] - mx);
    for (int i = 0; i < V; ++i) logits.data[i] = std::exp(logits.data[i] - mx) / z;
    return logits;
}

double lm_nll(const std::vector<Tensor>& prob_rows, const std::vector<int>& gold_ids) {
    if (prob_rows.size() != gold_ids.size())
        throw ShapeError("lm_nll: rows and gold ids differ in length");
    if (prob_rows.empty()) throw ShapeError("lm_nll: empty sequence");
    double s = 0.0;
    for (std::size_t t = 0; t < prob_rows.size(); ++t) {
        double p = prob_rows[t].data[gold_ids[t]];
        if (!(p > 0.0)) throw NumericalError("lm_nll: zero probability for gold word");
        s -= std::log(p);
    }
    return s / static_cast<double>(prob_rows.size());
}

}  // namespace incdisf
