#pragma once

#include <functional>
#include <string>
#include <vector>

#include "incdisf/rng.hpp"
#include "incdisf/tensor.hpp"

namespace incdisf {

// Trainable tensor with an accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape)) {}

    void zero_grad() { grad.fill(0.0); }
};

// Handle to a node on a Tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over Tensor-valued primitives. A tape is built forward,
// then backward(root) propagates d(root)/d(node) in reverse creation order
// and accumulates into each referenced Parameter's grad. Single-threaded.
class Tape {
public:
    Var constant(Tensor v);
    Var param(Parameter& p);

    const Tensor& value(Var v) const;

    Var matmul(Var a, Var b);   // (m,k)x(k,n) -> (m,n); (m,k)x(k) -> (m)
    Var add(Var a, Var b);      // elementwise, same shape
    Var mul(Var a, Var b);      // elementwise, same shape
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var exp(Var a);
    Var scale(Var a, double c);
    Var sum(Var a);             // -> scalar
    Var logsumexp(Var a);       // 1-D -> scalar, max-subtracted
    Var concat(Var a, Var b);   // 1-D ++ 1-D
    Var slice(Var a, int start, int len);   // 1-D
    Var lookup(Var table, int row);         // 2-D -> row as 1-D
    Var stack_rows(const std::vector<Var>& rows);  // T 1-D vectors -> (T,L)
    Var softmax(Var a);                     // 1-D, sums to 1
    Var nll_softmax(Var logits, int gold);  // -log softmax(logits)[gold]

    // Linear-chain CRF negative log-likelihood of the gold path, computed
    // with the forward algorithm; gradient via forward-backward marginals.
    Var crf_nll(Var emissions, Var trans, Var start, Var stop, const std::vector<int>& gold);

    void backward(Var root);

    std::size_t num_nodes() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // allocated during backward
        Parameter* param = nullptr;
        std::function<void(Tape&, const Tensor& g)> back;
    };

    Var push(Tensor value, std::function<void(Tape&, const Tensor&)> back, Parameter* p = nullptr);
    Tensor& grad(Var v) { return nodes_[v.id].grad; }
    void check_finite(const Tensor& t, const char* op) const;

    std::vector<Node> nodes_;
};

// Max over sampled coordinates of |analytic - numeric| / max(|a|, |n|, 1e-8),
// with central differences at +-eps. `loss_fn` must zero grads, rebuild its
// tape, run backward, and return the loss value.
double gradient_check(const std::function<double()>& loss_fn,
                      const std::vector<Parameter*>& params, double eps,
                      int max_coords_per_param, Rng& rng);

}  // namespace incdisf
