#include "incdisf/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace incdisf {

namespace {

double lse(const double* x, int n) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) m = std::max(m, x[i]);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(x[i] - m);
    return m + std::log(s);
}

}  // namespace

Var Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> back, Parameter* p) {
    Node n;
    n.value = std::move(value);
    n.back = std::move(back);
    n.param = p;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::check_finite(const Tensor& t, const char* op) const {
    if (!t.all_finite()) throw NumericalError(std::string("non-finite output of ") + op);
}

const Tensor& Tape::value(Var v) const { return nodes_[v.id].value; }

Var Tape::constant(Tensor v) {
    check_finite(v, "constant");
    return push(std::move(v), nullptr);
}

Var Tape::param(Parameter& p) {
    check_finite(p.value, "param");
    return push(p.value, nullptr, &p);
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.shape.size() != 2) throw ShapeError("matmul: lhs must be 2-D, got " + A.shape_str());
    int m = A.shape[0], k = A.shape[1];
    bool vec = B.shape.size() == 1;
    int k2 = vec ? B.shape[0] : (B.shape.size() == 2 ? B.shape[0] : -1);
    if (k2 != k) throw ShapeError("matmul: inner dims " + A.shape_str() + " vs " + B.shape_str());
    int n = vec ? 1 : B.shape[1];

    Tensor out = vec ? Tensor::zeros({m}) : Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        const double* arow = &A.data[static_cast<std::size_t>(i) * k];
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += arow[p] * B.data[static_cast<std::size_t>(p) * n + j];
            out.data[static_cast<std::size_t>(i) * n + j] = s;
        }
    }
    check_finite(out, "matmul");
    int kk = k, nn = n;
    return push(std::move(out), [a, b, kk, nn](Tape& t, const Tensor& g) {
        const Tensor& A = t.value(a);
        const Tensor& B = t.value(b);
        Tensor& ga = t.grad(a);
        Tensor& gb = t.grad(b);
        int m = A.shape[0];
        // dA += g . B^T, dB += A^T . g
        for (int i = 0; i < m; ++i)
            for (int p = 0; p < kk; ++p) {
                double s = 0.0;
                for (int j = 0; j < nn; ++j)
                    s += g.data[static_cast<std::size_t>(i) * nn + j] *
                         B.data[static_cast<std::size_t>(p) * nn + j];
                ga.data[static_cast<std::size_t>(i) * kk + p] += s;
            }
        for (int p = 0; p < kk; ++p)
            for (int j = 0; j < nn; ++j) {
                double s = 0.0;
                for (int i = 0; i < m; ++i)
                    s += A.data[static_cast<std::size_t>(i) * kk + p] *
                         g.data[static_cast<std::size_t>(i) * nn + j];
                gb.data[static_cast<std::size_t>(p) * nn + j] += s;
            }
    });
}

Var Tape::add(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw ShapeError("add: " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
    check_finite(out, "add");
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad(a);
        Tensor& gb = t.grad(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    });
}

Var Tape::mul(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw ShapeError("mul: " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= B.data[i];
    check_finite(out, "mul");
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        const Tensor& A = t.value(a);
        const Tensor& B = t.value(b);
        Tensor& ga = t.grad(a);
        Tensor& gb = t.grad(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i] * B.data[i];
            gb.data[i] += g.data[i] * A.data[i];
        }
    });
}

Var Tape::tanh(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::tanh(v);
    check_finite(out, "tanh");
    Var self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(self);
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            ga.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
    });
}

Var Tape::sigmoid(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    check_finite(out, "sigmoid");
    Var self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(self);
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            ga.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
    });
}

Var Tape::exp(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::exp(v);
    check_finite(out, "exp");
    Var self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(self);
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * y.data[i];
    });
}

Var Tape::scale(Var a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v *= c;
    check_finite(out, "scale");
    return push(std::move(out), [a, c](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * c;
    });
}

Var Tape::sum(Var a) {
    const Tensor& A = value(a);
    double s = 0.0;
    for (double v : A.data) s += v;
    Tensor out = Tensor::scalar(s);
    check_finite(out, "sum");
    return push(std::move(out), [a](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += g.data[0];
    });
}

Var Tape::logsumexp(Var a) {
    const Tensor& A = value(a);
    if (A.shape.size() != 1) throw ShapeError("logsumexp: expected 1-D, got " + A.shape_str());
    double v = lse(A.data.data(), static_cast<int>(A.size()));
    Tensor out = Tensor::scalar(v);
    check_finite(out, "logsumexp");
    Var self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](Tape& t, const Tensor& g) {
        const Tensor& A = t.value(a);
        double y = t.value(self).data[0];
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < A.size(); ++i)
            ga.data[i] += g.data[0] * std::exp(A.data[i] - y);
    });
}

Var Tape::concat(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.shape.size() != 1 || B.shape.size() != 1)
        throw ShapeError("concat: expected 1-D inputs");
    Tensor out = Tensor::zeros({A.shape[0] + B.shape[0]});
    std::copy(A.data.begin(), A.data.end(), out.data.begin());
    std::copy(B.data.begin(), B.data.end(), out.data.begin() + A.shape[0]);
    int na = A.shape[0];
    return push(std::move(out), [a, b, na](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad(a);
        Tensor& gb = t.grad(b);
        for (int i = 0; i < na; ++i) ga.data[i] += g.data[i];
        for (std::size_t i = na; i < g.size(); ++i) gb.data[i - na] += g.data[i];
    });
}

Var Tape::slice(Var a, int start, int len) {
    const Tensor& A = value(a);
    if (A.shape.size() != 1) throw ShapeError("slice: expected 1-D input");
    if (start < 0 || len < 0 || start + len > A.shape[0])
        throw ShapeError("slice: range out of bounds");
    Tensor out = Tensor::zeros({len});
    std::copy(A.data.begin() + start, A.data.begin() + start + len, out.data.begin());
    return push(std::move(out), [a, start, len](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad(a);
        for (int i = 0; i < len; ++i) ga.data[start + i] += g.data[i];
    });
}

Var Tape::lookup(Var table, int row) {
    const Tensor& T = value(table);
    if (T.shape.size() != 2) throw ShapeError("lookup: expected 2-D table");
    if (row < 0 || row >= T.shape[0]) throw ShapeError("lookup: row out of range");
    int n = T.shape[1];
    Tensor out = Tensor::zeros({n});
    std::copy(T.data.begin() + static_cast<std::size_t>(row) * n,
              T.data.begin() + static_cast<std::size_t>(row + 1) * n, out.data.begin());
    return push(std::move(out), [table, row, n](Tape& t, const Tensor& g) {
        Tensor& gt = t.grad(table);
        for (int i = 0; i < n; ++i) gt.data[static_cast<std::size_t>(row) * n + i] += g.data[i];
    });
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw ShapeError("stack_rows: no rows");
    int n = value(rows[0]).shape[0];
    for (Var r : rows)
        if (value(r).shape.size() != 1 || value(r).shape[0] != n)
            throw ShapeError("stack_rows: inconsistent row widths");
    int m = static_cast<int>(rows.size());
    Tensor out = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i)
        std::copy(value(rows[i]).data.begin(), value(rows[i]).data.end(),
                  out.data.begin() + static_cast<std::size_t>(i) * n);
    std::vector<Var> rs = rows;
    return push(std::move(out), [rs, n](Tape& t, const Tensor& g) {
        for (std::size_t i = 0; i < rs.size(); ++i) {
            Tensor& gr = t.grad(rs[i]);
            for (int j = 0; j < n; ++j) gr.data[j] += g.data[i * n + j];
        }
    });
}

Var Tape::softmax(Var a) {
    const Tensor& A = value(a);
    if (A.shape.size() != 1) throw ShapeError("softmax: expected 1-D input");
    int n = A.shape[0];
    double z = lse(A.data.data(), n);
    Tensor out = Tensor::zeros({n});
    for (int i = 0; i < n; ++i) out.data[i] = std::exp(A.data[i] - z);
    check_finite(out, "softmax");
    Var self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(self);
        Tensor& ga = t.grad(a);
        double dot = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g.data[i] * y.data[i];
        for (std::size_t i = 0; i < g.size(); ++i)
            ga.data[i] += y.data[i] * (g.data[i] - dot);
    });
}

Var Tape::nll_softmax(Var logits, int gold) {
    const Tensor& A = value(logits);
    if (A.shape.size() != 1) throw ShapeError("nll_softmax: expected 1-D logits");
    int n = A.shape[0];
    if (gold < 0 || gold >= n) throw ShapeError("nll_softmax: gold index out of range");
    double z = lse(A.data.data(), n);
    Tensor out = Tensor::scalar(z - A.data[gold]);
    check_finite(out, "nll_softmax");
    double zz = z;
    return push(std::move(out), [logits, gold, zz](Tape& t, const Tensor& g) {
        const Tensor& A = t.value(logits);
        Tensor& ga = t.grad(logits);
        for (std::size_t i = 0; i < A.size(); ++i) {
            double p = std::exp(A.data[i] - zz);
            ga.data[i] += g.data[0] * (p - (static_cast<int>(i) == gold ? 1.0 : 0.0));
        }
    });
}

Var Tape::crf_nll(Var emissions, Var trans, Var start, Var stop, const std::vector<int>& gold) {
    const Tensor& E = value(emissions);
    const Tensor& Tr = value(trans);
    const Tensor& S = value(start);
    const Tensor& P = value(stop);
    if (E.shape.size() != 2) throw ShapeError("crf_nll: emissions must be (T,L)");
    int T = E.shape[0], L = E.shape[1];
    if (Tr.shape != std::vector<int>{L, L}) throw ShapeError("crf_nll: bad transition shape");
    if (S.shape != std::vector<int>{L} || P.shape != std::vector<int>{L})
        throw ShapeError("crf_nll: bad start/stop shape");
    if (static_cast<int>(gold.size()) != T) throw ShapeError("crf_nll: gold length != T");
    for (int y : gold)
        if (y < 0 || y >= L) throw ShapeError("crf_nll: gold label out of range");

    // Forward algorithm in log space.
    std::vector<double> alpha(static_cast<std::size_t>(T) * L);
    for (int j = 0; j < L; ++j) alpha[j] = S.data[j] + E.at(0, j);
    std::vector<double> work(L);
    for (int t = 1; t < T; ++t)
        for (int j = 0; j < L; ++j) {
            for (int i = 0; i < L; ++i)
                work[i] = alpha[static_cast<std::size_t>(t - 1) * L + i] + Tr.at(i, j);
            alpha[static_cast<std::size_t>(t) * L + j] = lse(work.data(), L) + E.at(t, j);
        }
    for (int j = 0; j < L; ++j) work[j] = alpha[static_cast<std::size_t>(T - 1) * L + j] + P.data[j];
    double log_z = lse(work.data(), L);

    double gold_score = S.data[gold[0]] + E.at(0, gold[0]);
    for (int t = 1; t < T; ++t) gold_score += Tr.at(gold[t - 1], gold[t]) + E.at(t, gold[t]);
    gold_score += P.data[gold[T - 1]];

    Tensor out = Tensor::scalar(log_z - gold_score);
    check_finite(out, "crf_nll");

    std::vector<int> y = gold;
    return push(std::move(out),
                [emissions, trans, start, stop, y, alpha = std::move(alpha), log_z, T,
                 L](Tape& t, const Tensor& g) {
                    const Tensor& E = t.value(emissions);
                    const Tensor& Tr = t.value(trans);
                    const Tensor& P = t.value(stop);
                    double gs = g.data[0];

                    // Backward recursion.
                    std::vector<double> beta(static_cast<std::size_t>(T) * L);
                    for (int j = 0; j < L; ++j)
                        beta[static_cast<std::size_t>(T - 1) * L + j] = P.data[j];
                    std::vector<double> work(L);
                    for (int tt = T - 2; tt >= 0; --tt)
                        for (int i = 0; i < L; ++i) {
                            for (int j = 0; j < L; ++j)
                                work[j] = Tr.at(i, j) + E.at(tt + 1, j) +
                                          beta[static_cast<std::size_t>(tt + 1) * L + j];
                            beta[static_cast<std::size_t>(tt) * L + i] = lse(work.data(), L);
                        }

                    Tensor& ge = t.grad(emissions);
                    Tensor& gt = t.grad(trans);
                    Tensor& gst = t.grad(start);
                    Tensor& gsp = t.grad(stop);

                    for (int tt = 0; tt < T; ++tt)
                        for (int j = 0; j < L; ++j) {
                            double marg = std::exp(alpha[static_cast<std::size_t>(tt) * L + j] +
                                                   beta[static_cast<std::size_t>(tt) * L + j] -
                                                   log_z);
                            double d = marg - (y[tt] == j ? 1.0 : 0.0);
                            ge.at(tt, j) += gs * d;
                            if (tt == 0) gst.data[j] += gs * d;
                            if (tt == T - 1) gsp.data[j] += gs * marg - gs * (y[tt] == j ? 1.0 : 0.0);
                        }
                    for (int tt = 1; tt < T; ++tt)
                        for (int i = 0; i < L; ++i)
                            for (int j = 0; j < L; ++j) {
                                double pair = std::exp(
                                    alpha[static_cast<std::size_t>(tt - 1) * L + i] + Tr.at(i, j) +
                                    E.at(tt, j) + beta[static_cast<std::size_t>(tt) * L + j] -
                                    log_z);
                                double d = pair - (y[tt - 1] == i && y[tt] == j ? 1.0 : 0.0);
                                gt.at(i, j) += gs * d;
                            }
                });
}

void Tape::backward(Var root) {
    if (!root.valid() || root.id >= static_cast<int>(nodes_.size()))
        throw UsageError("backward: invalid root");
    if (!nodes_[root.id].value.is_scalar())
        throw UsageError("backward: root must be scalar, got shape " +
                         nodes_[root.id].value.shape_str());
    for (Node& n : nodes_) n.grad = Tensor::zeros(n.value.shape);
    nodes_[root.id].grad.data[0] = 1.0;
    for (int i = root.id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.back) n.back(*this, n.grad);
        if (n.param) {
            for (std::size_t j = 0; j < n.grad.size(); ++j)
                n.param->grad.data[j] += n.grad.data[j];
        }
    }
}

double gradient_check(const std::function<double()>& loss_fn,
                      const std::vector<Parameter*>& params, double eps,
                      int max_coords_per_param, Rng& rng) {
    loss_fn();
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (Parameter* p : params) analytic.push_back(p->grad);

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& p = *params[pi];
        std::size_t n = p.value.size();
        std::vector<std::size_t> coords;
        if (static_cast<int>(n) <= max_coords_per_param) {
            for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
        } else {
            for (int i = 0; i < max_coords_per_param; ++i)
                coords.push_back(static_cast<std::size_t>(rng.uniform_int(n)));
        }
        for (std::size_t c : coords) {
            double orig = p.value.data[c];
            p.value.data[c] = orig + eps;
            double lp = loss_fn();
            p.value.data[c] = orig - eps;
            double lm = loss_fn();
            p.value.data[c] = orig;
            double numeric = (lp - lm) / (2.0 * eps);
            double a = analytic[pi].data[c];
            double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, rel);
        }
    }
    // Restore grads to the unperturbed state.
    loss_fn();
    return max_rel;
}

}  // namespace incdisf
