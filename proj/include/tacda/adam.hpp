#pragma once

// Bias-corrected Adam, one state per parameter group so the decoder can run
// at its higher rate.

#include <cmath>
#include <cstddef>
#include <vector>

#include "tacda/error.hpp"
#include "tacda/nets.hpp"
#include "tacda/tensor.hpp"

namespace tacda {

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    void init_like(const ParamGroup& g, double rate) {
        require(rate > 0.0, "AdamState: learning rate must be positive");
        lr = rate;
        step = 0;
        m.clear();
        v.clear();
        m.reserve(g.count());
        v.reserve(g.count());
        for (std::size_t i = 0; i < g.count(); ++i) {
            m.push_back(Tensor::zeros(g.param_at(i).shape()));
            v.push_back(Tensor::zeros(g.param_at(i).shape()));
        }
    }

    bool initialized() const { return !m.empty() || step > 0; }

    void apply(ParamGroup& g, const std::vector<Tensor>& grads) {
        require(m.size() == g.count() && grads.size() == g.count(),
                "AdamState::apply: state does not match the parameter group");
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < g.count(); ++i) {
            Tensor& p = g.param_at(i);
            const Tensor& grad = grads[i];
            require(p.same_shape(grad), "AdamState::apply: gradient shape mismatch");
            Tensor& mi = m[i];
            Tensor& vi = v[i];
            for (std::size_t j = 0; j < p.size(); ++j) {
                mi[j] = beta1 * mi[j] + (1.0 - beta1) * grad[j];
                vi[j] = beta2 * vi[j] + (1.0 - beta2) * grad[j] * grad[j];
                const double mhat = mi[j] / c1;
                const double vhat = vi[j] / c2;
                p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }
};

}  // namespace tacda
