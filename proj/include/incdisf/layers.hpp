#pragma once

#include <utility>
#include <vector>

#include "incdisf/autodiff.hpp"

namespace incdisf {

// Gate order in the stacked 4H rows: input, forget, candidate, output.
struct LstmParams {
    int input_dim = 0;
    int hidden = 0;
    Parameter wx;  // [4H x D]
    Parameter wh;  // [4H x H]
    Parameter b;   // [4H]

    LstmParams() = default;
    LstmParams(int input_dim, int hidden, Rng& rng);
    std::vector<Parameter*> params() { return {&wx, &wh, &b}; }
};

struct LstmVarState {
    Var h, c;
};

struct LstmState {
    Tensor h, c;
};

LstmVarState lstm_step(Tape& t, Var x, const LstmVarState& prev, LstmParams& p,
                       Var wx, Var wh, Var b);
LstmState lstm_step_infer(const std::vector<double>& x, const LstmState& prev,
                          const LstmParams& p);

// tanh feedforward head (Eq.-2 style): d = tanh(W x).
Var ff_tanh(Tape& t, Var w, Var x);
Tensor ff_tanh_infer(const Parameter& w, const Tensor& x);

// Emission projection + linear-chain CRF for one tagging task.
struct TaggingHead {
    int num_labels = 0;
    Parameter ff_w;    // [ffDim x H]
    Parameter emit_w;  // [L x ffDim]
    Parameter emit_b;  // [L]
    Parameter trans;   // [L x L]
    Parameter start;   // [L]
    Parameter stop;    // [L]

    TaggingHead() = default;
    TaggingHead(const std::string& name, int hidden, int ff_dim, int labels, Rng& rng);
    std::vector<Parameter*> params() {
        return {&ff_w, &emit_w, &emit_b, &trans, &start, &stop};
    }

    // One emission row from one hidden state (no tape).
    Tensor emissions_row(const Tensor& h) const;
};

// Viterbi decode with provisional stop scores; ties prefer the lower label
// index at the latest differing position.
std::pair<std::vector<int>, double> crf_viterbi(const Tensor& emissions, const Tensor& trans,
                                                const Tensor& start, const Tensor& stop);
std::pair<std::vector<int>, double> crf_viterbi(const Tensor& emissions, const TaggingHead& head);

double crf_path_score(const Tensor& emissions, const Tensor& trans, const Tensor& start,
                      const Tensor& stop, const std::vector<int>& path);

// Forward-algorithm NLL without a tape (dev-set monitoring).
double crf_nll_value(const Tensor& emissions, const Tensor& trans, const Tensor& start,
                     const Tensor& stop, const std::vector<int>& gold);

// Language-model head: m = tanh(W_m h), p(w) = softmax(W_q m_prev).
struct LmHead {
    int lm_dim = 0;
    Parameter wm;  // [M x H]
    Parameter m0;  // [M] learned start-of-sequence representation
    Parameter wq;  // [V x M]

    LmHead() = default;
    LmHead(int hidden, int lm_dim, int vocab, Rng& rng);
    std::vector<Parameter*> params() { return {&wm, &m0, &wq}; }
};

// Next-word distribution from the previous step's LM representation.
Tensor lm_step_infer(const Tensor& m_prev, const LmHead& head);

// Mean of -log p over a window given per-step probability rows.
double lm_nll(const std::vector<Tensor>& prob_rows, const std::vector<int>& gold_ids);

}  // namespace incdisf
