#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tacda/nets.hpp"
#include "tacda/rng.hpp"
#include "tacda/softdtw.hpp"
#include "tacda/tensor.hpp"

namespace tacda::checks {

// Central finite differences of a scalar function with respect to every
// entry of x. f() reads the current contents of x.
template <typename F>
Tensor finite_difference(F&& f, Tensor& x, double h = 1e-6) {
    Tensor g{x.shape()};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double fp = f();
        x[i] = keep - h;
        const double fm = f();
        x[i] = keep;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Worst elementwise relative error with an absolute floor of 1:
// max_i |a_i - b_i| / max(1, |a_i| + |b_i|).
inline double max_rel_error(const Tensor& a, const Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max(1.0, std::abs(a[i]) + std::abs(b[i]));
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

struct SuiteResult {
    std::string name;
    bool pass = false;
    double worst = 0.0;
    double tolerance = 0.0;
    std::size_t cases = 0;
};

inline Tensor random_series(std::size_t m, std::size_t len, Rng& rng, double lo = -2.0, double hi = 2.0) {
    return random_uniform({m, len}, lo, hi, rng);
}

// |soft_dtw - brute_force| over random small instances; tolerance 1e-9.
inline SuiteResult softdtw_oracle_suite(std::size_t instances, std::uint64_t seed) {
    SuiteResult res{"softdtw-oracle-equivalence", false, 0.0, 1e-9, instances};
    Rng rng = Rng(seed).split("softdtw.oracle");
    const double gammas[] = {0.01, 0.1, 1.0};
    for (std::size_t n = 0; n < instances; ++n) {
        const std::size_t len = 1 + rng.uniform_index(6);
        const std::size_t m = 1 + rng.uniform_index(3);
        const double gamma = gammas[n % 3];
        const Tensor x = random_series(m, len, rng);
        const Tensor y = random_series(m, len, rng);
        const double dp = soft_dtw(x, y, gamma).value;
        const double bf = brute_force_soft_dtw(x, y, gamma);
        res.worst = std::max(res.worst, std::abs(dp - bf));
    }
    res.pass = res.worst <= res.tolerance;
    return res;
}

// soft_dtw_grad vs central finite differences; tolerance 1e-5 relative.
inline SuiteResult softdtw_gradient_suite(std::size_t instances, std::uint64_t seed) {
    SuiteResult res{"softdtw-gradient-vs-fd", false, 0.0, 1e-5, instances};
    Rng rng = Rng(seed).split("softdtw.grad");
    const double gammas[] = {0.01, 0.1, 1.0};
    for (std::size_t n = 0; n < instances; ++n) {
        const std::size_t len = 2 + rng.uniform_index(7);
        const std::size_t m = 1 + rng.uniform_index(3);
        const double gamma = gammas[n % 3];
        Tensor x = random_series(m, len, rng);
        const Tensor y = random_series(m, len, rng);
        const Tensor analytic = soft_dtw_grad(x, y, gamma).grad_x;
        const Tensor fd = finite_difference([&] { return soft_dtw(x, y, gamma).value; }, x);
        res.worst = std::max(res.worst, max_rel_error(analytic, fd));
    }
    res.pass = res.worst <= res.tolerance;
    return res;
}

// gamma -> 0 limit: at gamma = 1e-3 the soft value sits within
// 1e-2 * (1 + |DTW|) of the min-path value, and never exceeds it.
inline SuiteResult hard_dtw_limit_suite(std::size_t instances, std::uint64_t seed) {
    SuiteResult res{"softdtw-hard-limit", false, 0.0, 1.0, instances};
    Rng rng = Rng(seed).split("softdtw.hardlimit");
    bool bound_ok = true;
    for (std::size_t n = 0; n < instances; ++n) {
        const std::size_t len = 2 + rng.uniform_index(9);
        const std::size_t m = 1 + rng.uniform_index(3);
        const Tensor x = random_series(m, len, rng);
        const Tensor y = random_series(m, len, rng);
        const double hard = hard_dtw(x, y);
        const double soft = soft_dtw(x, y, 1e-3).value;
        if (soft > hard) bound_ok = false;
        res.worst = std::max(res.worst, std::abs(soft - hard) / (1e-2 * (1.0 + std::abs(hard))));
    }
    res.pass = bound_ok && res.worst <= res.tolerance;
    return res;
}

// Composed-graph check: encoder->predictor MSE, encoder->decoder soft-DTW,
// and encoder->discriminator adversarial losses, every parameter probed
// against central finite differences on a tiny bidirectional model.
inline SuiteResult autodiff_graph_suite(std::uint64_t seed) {
    SuiteResult res{"full-graph-grad-vs-fd", false, 0.0, 1e-4, 0};
    ArchDescriptor arch;
    arch.input_dim = 3;
    arch.hidden = 8;
    arch.layers = 1;
    arch.bidirectional = true;
    arch.window_len = 10;
    arch.head_hidden = 8;
    arch.head_layers = 2;
    ModelBundle model = make_model(arch, seed);

    Rng rng = Rng(seed).split("graphcheck");
    std::vector<Tensor> xs, xt;
    for (int b = 0; b < 2; ++b) {
        xs.push_back(random_series(arch.input_dim, arch.window_len, rng, -1.0, 1.0));
        xt.push_back(random_series(arch.input_dim, arch.window_len, rng, -1.0, 1.0));
    }
    const Tensor y = random_uniform({2, 1}, 0.0, 1.0, rng);

    auto run_case = [&](const std::vector<ParamGroup*>& groups, auto&& build) {
        ad::Tape tape;
        std::vector<TapedGroup> lifted;
        for (ParamGroup* g : groups) lifted.push_back(lift(tape, *g, true));
        tape.backward(build(tape, lifted));
        auto f = [&]() {
            ad::Tape t2;
            std::vector<TapedGroup> l2;
            for (ParamGroup* g : groups) l2.push_back(lift(t2, *g, false));
            return t2.value_scalar(build(t2, l2));
        };
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            for (std::size_t pi = 0; pi < groups[gi]->count(); ++pi) {
                const Tensor& analytic = tape.grad(lifted[gi].vars[pi]);
                const Tensor numeric = finite_difference(f, groups[gi]->param_at(pi), 1e-6);
                res.worst = std::max(res.worst, max_rel_error(analytic, numeric));
                ++res.cases;
            }
        }
    };

    run_case({&model.encoder_source, &model.predictor},
             [&](ad::Tape& t, const std::vector<TapedGroup>& g) {
                 ad::Var f = encode_batch(t, g[0], arch, xs);
                 ad::Var p = head_batch(t, g[1], arch, f, false);
                 ad::Var diff = t.sub(p, t.constant(y));
                 return t.mean(t.mul(diff, diff));
             });
    run_case({&model.encoder_target, &model.decoder},
             [&](ad::Tape& t, const std::vector<TapedGroup>& g) {
                 ad::Var f = encode_batch(t, g[0], arch, xt);
                 return t.soft_dtw_batch_loss(decode_batch(t, g[1], arch, f), xt, 0.1);
             });
    run_case({&model.encoder_source, &model.encoder_target, &model.discriminator},
             [&](ad::Tape& t, const std::vector<TapedGroup>& g) {
                 ad::Var fs = encode_batch(t, g[0], arch, xs);
                 ad::Var ft = encode_batch(t, g[1], arch, xt);
                 ad::Var ds = head_batch(t, g[2], arch, fs, true);
                 ad::Var dt = head_batch(t, g[2], arch, ft, true);
                 return t.add(t.mean(t.log_(ds)), t.mean(t.log_(t.rsub_scalar(1.0, dt))));
             });

    res.pass = res.worst <= res.tolerance;
    return res;
}

}  // namespace tacda::checks
