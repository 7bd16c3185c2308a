#pragma once

// Reverse-mode autodiff over dense rank-2 tensors. The tape owns every
// node (value + gradient); ops record a backward closure over parent
// indices, so vector reallocation is safe. Gradients accumulate
// additively at fan-out.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tacda/error.hpp"
#include "tacda/softdtw.hpp"
#include "tacda/tensor.hpp"

namespace tacda::ad {

class Tape;

struct Var {
    Tape* tape = nullptr;
    std::size_t idx = static_cast<std::size_t>(-1);
    bool valid() const { return tape != nullptr; }
};

class Tape {
  public:
    std::size_t size() const { return nodes_.size(); }

    Var leaf(Tensor value, bool requires_grad) {
        return push(std::move(value), requires_grad, {});
    }
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    const Tensor& value(Var v) const { return node(v).value; }
    const Tensor& grad(Var v) const { return node(v).grad; }
    double value_scalar(Var v) const {
        const Tensor& t = node(v).value;
        require(t.size() == 1, "Tape::value_scalar: node is not scalar");
        return t[0];
    }

    Var add(Var a, Var b) {
        check_same_shape(a, b, "add");
        Tensor out = value(a);
        const Tensor& bv = value(b);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
        return push(std::move(out), needs(a) || needs(b),
                    [ai = a.idx, bi = b.idx](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        t.accumulate(ai, [&](Tensor& pg) {
                            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
                        });
                        t.accumulate(bi, [&](Tensor& pg) {
                            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
                        });
                    });
    }

    Var sub(Var a, Var b) {
        check_same_shape(a, b, "sub");
        Tensor out = value(a);
        const Tensor& bv = value(b);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
        return push(std::move(out), needs(a) || needs(b),
                    [ai = a.idx, bi = b.idx](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        t.accumulate(ai, [&](Tensor& pg) {
                            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
                        });
                        t.accumulate(bi, [&](Tensor& pg) {
                            for (std::size_t i = 0; i < g.size(); ++i) pg[i] -= g[i];
                        });
                    });
    }

    Var mul(Var a, Var b) {
        check_same_shape(a, b, "mul");
        Tensor out = value(a);
        const Tensor& bv = value(b);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
        return push(std::move(out), needs(a) || needs(b),
                    [ai = a.idx, bi = b.idx](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        const Tensor& av = t.nodes_[ai].value;
                        const Tensor& bv2 = t.nodes_[bi].value;
                        t.accumulate(ai, [&](Tensor& pg) {
                            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * bv2[i];
                        });
                        t.accumulate(bi, [&](Tensor& pg) {
                            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * av[i];
                        });
                    });
    }

    Var scale(Var a, double s) {
        Tensor out = value(a);
        for (auto& v : out.storage()) v *= s;
        return push(std::move(out), needs(a), [ai = a.idx, s](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += s * g[i];
            });
        });
    }

    // s - a, elementwise (used for the 1 - D(f) term)
    Var rsub_scalar(double s, Var a) {
        Tensor out = value(a);
        for (auto& v : out.storage()) v = s - v;
        return push(std::move(out), needs(a), [ai = a.idx](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] -= g[i];
            });
        });
    }

    Var matmul(Var a, Var b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        require(av.rank() == 2 && bv.rank() == 2 && av.cols() == bv.rows(),
                "Tape::matmul: inner dimensions disagree");
        Tensor out = tacda::matmul(av, bv);
        return push(std::move(out), needs(a) || needs(b),
                    [ai = a.idx, bi = b.idx](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        const Tensor& av2 = t.nodes_[ai].value;
                        const Tensor& bv2 = t.nodes_[bi].value;
                        t.accumulate(ai, [&](Tensor& pg) { addmm_nt(pg, g, bv2); });
                        t.accumulate(bi, [&](Tensor& pg) { addmm_tn(pg, av2, g); });
                    });
    }

    // a: B x D, bias: rank-1 length D, broadcast over rows
    Var add_rowvec(Var a, Var bias) {
        const Tensor& av = value(a);
        const Tensor& bv = value(bias);
        require(av.rank() == 2 && bv.rank() == 1 && bv.size() == av.cols(),
                "Tape::add_rowvec: bias length must equal column count");
        Tensor out = av;
        for (std::size_t r = 0; r < av.rows(); ++r)
            for (std::size_t c = 0; c < av.cols(); ++c) out.at(r, c) += bv[c];
        return push(std::move(out), needs(a) || needs(bias),
                    [ai = a.idx, bi = bias.idx](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        t.accumulate(ai, [&](Tensor& pg) {
                            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
                        });
                        t.accumulate(bi, [&](Tensor& pg) {
                            for (std::size_t r = 0; r < g.rows(); ++r)
                                for (std::size_t c = 0; c < g.cols(); ++c) pg[c] += g.at(r, c);
                        });
                    });
    }

    Var tanh_(Var a) {
        Tensor out = value(a);
        for (auto& v : out.storage()) v = std::tanh(v);
        return push(std::move(out), needs(a), [ai = a.idx](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * (1.0 - y[i] * y[i]);
            });
        });
    }

    Var sigmoid_(Var a) {
        Tensor out = value(a);
        for (auto& v : out.storage()) v = stable_sigmoid(v);
        return push(std::move(out), needs(a), [ai = a.idx](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * y[i] * (1.0 - y[i]);
            });
        });
    }

    Var relu_(Var a) {
        Tensor out = value(a);
        for (auto& v : out.storage()) v = v > 0.0 ? v : 0.0;
        return push(std::move(out), needs(a), [ai = a.idx](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& x = t.nodes_[ai].value;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (x[i] > 0.0) pg[i] += g[i];
            });
        });
    }

    Var softplus_(Var a) {
        Tensor out = value(a);
        for (auto& v : out.storage())
            v = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
        return push(std::move(out), needs(a), [ai = a.idx](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& x = t.nodes_[ai].value;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * stable_sigmoid(x[i]);
            });
        });
    }

    Var log_(Var a) {
        Tensor out = value(a);
        for (auto& v : out.storage()) {
            require(v > 0.0, "Tape::log_: operand must be strictly positive");
            v = std::log(v);
        }
        return push(std::move(out), needs(a), [ai = a.idx](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& x = t.nodes_[ai].value;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] / x[i];
            });
        });
    }

    Var clamp(Var a, double lo, double hi) {
        require(lo < hi, "Tape::clamp: lo must be below hi");
        Tensor out = value(a);
        for (auto& v : out.storage()) v = v < lo ? lo : (v > hi ? hi : v);
        return push(std::move(out), needs(a), [ai = a.idx, lo, hi](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& x = t.nodes_[ai].value;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (x[i] > lo && x[i] < hi) pg[i] += g[i];
            });
        });
    }

    // columns [c0, c1) of a rank-2 node
    Var slice_cols(Var a, std::size_t c0, std::size_t c1) {
        const Tensor& av = value(a);
        require(av.rank() == 2 && c0 < c1 && c1 <= av.cols(),
                "Tape::slice_cols: column range out of bounds");
        Tensor out({av.rows(), c1 - c0});
        for (std::size_t r = 0; r < av.rows(); ++r)
            for (std::size_t c = c0; c < c1; ++c) out.at(r, c - c0) = av.at(r, c);
        return push(std::move(out), needs(a), [ai = a.idx, c0](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            t.accumulate(ai, [&](Tensor& pg) {
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < g.cols(); ++c) pg.at(r, c0 + c) += g.at(r, c);
            });
        });
    }

    Var hconcat(Var a, Var b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        require(av.rank() == 2 && bv.rank() == 2 && av.rows() == bv.rows(),
                "Tape::hconcat: row counts disagree");
        Tensor out({av.rows(), av.cols() + bv.cols()});
        for (std::size_t r = 0; r < av.rows(); ++r) {
            for (std::size_t c = 0; c < av.cols(); ++c) out.at(r, c) = av.at(r, c);
            for (std::size_t c = 0; c < bv.cols(); ++c) out.at(r, av.cols() + c) = bv.at(r, c);
        }
        const std::size_t ac = av.cols();
        return push(std::move(out), needs(a) || needs(b),
                    [ai = a.idx, bi = b.idx, ac](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        t.accumulate(ai, [&](Tensor& pg) {
                            for (std::size_t r = 0; r < g.rows(); ++r)
                                for (std::size_t c = 0; c < ac; ++c) pg.at(r, c) += g.at(r, c);
                        });
                        t.accumulate(bi, [&](Tensor& pg) {
                            for (std::size_t r = 0; r < g.rows(); ++r)
                                for (std::size_t c = 0; c < pg.cols(); ++c)
                                    pg.at(r, c) += g.at(r, ac + c);
                        });
                    });
    }

    Var sum(Var a) {
        double s = 0.0;
        for (double v : value(a).storage()) s += v;
        return push(Tensor::matrix(1, 1, {s}), needs(a), [ai = a.idx](Tape& t, std::size_t self) {
            const double g = t.nodes_[self].grad[0];
            t.accumulate(ai, [&](Tensor& pg) {
                for (auto& v : pg.storage()) v += g;
            });
        });
    }

    Var mean(Var a) {
        const std::size_t n = value(a).size();
        require(n > 0, "Tape::mean: empty operand");
        double s = 0.0;
        for (double v : value(a).storage()) s += v;
        return push(Tensor::matrix(1, 1, {s / static_cast<double>(n)}), needs(a),
                    [ai = a.idx, n](Tape& t, std::size_t self) {
                        const double g = t.nodes_[self].grad[0] / static_cast<double>(n);
                        t.accumulate(ai, [&](Tensor& pg) {
                            for (auto& v : pg.storage()) v += g;
                        });
                    });
    }

    // Mean soft-DTW between B reconstructed series and B fixed targets.
    // steps[t] is the B x M read-out at time t; targets[b] is M x L.
    // The alignment-matrix gradient is computed in the forward pass and
    // replayed by the backward closure.
    Var soft_dtw_batch_loss(const std::vector<Var>& steps, const std::vector<Tensor>& targets,
                            double gamma) {
        require(!steps.empty(), "Tape::soft_dtw_batch_loss: no read-out steps");
        const std::size_t L = steps.size();
        const Tensor& s0 = value(steps[0]);
        require(s0.rank() == 2, "Tape::soft_dtw_batch_loss: steps must be rank-2");
        const std::size_t B = s0.rows();
        const std::size_t M = s0.cols();
        require(targets.size() == B, "Tape::soft_dtw_batch_loss: batch sizes disagree");
        bool any = false;
        std::vector<std::size_t> parents(L);
        for (std::size_t t = 0; t < L; ++t) {
            require(value(steps[t]).rows() == B && value(steps[t]).cols() == M,
                    "Tape::soft_dtw_batch_loss: inconsistent step shapes");
            parents[t] = steps[t].idx;
            any = any || needs(steps[t]);
        }
        auto grads = std::make_shared<std::vector<Tensor>>();
        grads->reserve(B);
        double total = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            require(targets[b].rank() == 2 && targets[b].rows() == M,
                    "Tape::soft_dtw_batch_loss: target sensor count disagrees");
            Tensor recon({M, L});
            for (std::size_t t = 0; t < L; ++t)
                for (std::size_t m = 0; m < M; ++m) recon.at(m, t) = value(steps[t]).at(b, m);
            SoftDtwResult res = soft_dtw_grad(recon, targets[b], gamma);
            total += res.value;
            grads->push_back(std::move(res.grad_x));
        }
        total /= static_cast<double>(B);
        return push(Tensor::matrix(1, 1, {total}), any,
                    [parents, grads, B](Tape& t, std::size_t self) {
                        const double g = t.nodes_[self].grad[0] / static_cast<double>(B);
                        for (std::size_t ti = 0; ti < parents.size(); ++ti) {
                            t.accumulate(parents[ti], [&](Tensor& pg) {
                                for (std::size_t b = 0; b < B; ++b)
                                    for (std::size_t m = 0; m < pg.cols(); ++m)
                                        pg.at(b, m) += g * (*grads)[b].at(m, ti);
                            });
                        }
                    });
    }

    void backward(Var loss) {
        require(loss.tape == this, "Tape::backward: node belongs to another tape");
        const Tensor& lv = node(loss).value;
        require(lv.size() == 1, "Tape::backward: loss must be scalar");
        node_mut(loss).grad[0] = 1.0;
        for (std::size_t i = loss.idx + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.requires_grad && n.back) n.back(*this, i);
        }
    }

    void zero_grad() {
        for (Node& n : nodes_) n.grad.fill(0.0);
    }

  private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::function<void(Tape&, std::size_t)> back;
    };

    static double stable_sigmoid(double v) {
        if (v >= 0.0) {
            const double e = std::exp(-v);
            return 1.0 / (1.0 + e);
        }
        const double e = std::exp(v);
        return e / (1.0 + e);
    }

    bool needs(Var v) const { return node(v).requires_grad; }

    template <class F>
    void accumulate(std::size_t parent, F&& f) {
        if (nodes_[parent].requires_grad) f(nodes_[parent].grad);
    }

    void check_same_shape(Var a, Var b, const char* op) const {
        require(value(a).same_shape(value(b)),
                std::string("Tape::") + op + ": operand shapes disagree");
    }

    const Node& node(Var v) const {
        require(v.tape == this && v.idx < nodes_.size(), "Tape: foreign or stale node handle");
        return nodes_[v.idx];
    }
    Node& node_mut(Var v) {
        require(v.tape == this && v.idx < nodes_.size(), "Tape: foreign or stale node handle");
        return nodes_[v.idx];
    }

    Var push(Tensor value, bool requires_grad, std::function<void(Tape&, std::size_t)> back) {
        Node n;
        n.grad = Tensor::zeros(value.shape());
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Var{this, nodes_.size() - 1};
    }

    std::vector<Node> nodes_;
};

// y = x W + b as one call; the building block for every head layer.
inline Var affine(Tape& t, Var x, Var w, Var b) { return t.add_rowvec(t.matmul(x, w), b); }

}  // namespace tacda::ad
