#pragma once

// The four networks: recurrent encoders E_S/E_T, sequence decoder D_T,
// discriminator D, RUL predictor R. Parameters live outside any tape in
// named groups; each training step lifts them onto a fresh tape.

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tacda/autodiff.hpp"
#include "tacda/error.hpp"
#include "tacda/rng.hpp"
#include "tacda/tensor.hpp"

namespace tacda {

struct ArchDescriptor {
    std::size_t input_dim = 14;
    std::size_t hidden = 16;
    std::size_t layers = 1;
    bool bidirectional = false;
    std::size_t window_len = 30;
    std::size_t head_hidden = 32;
    std::size_t head_layers = 2;

    std::size_t feature_dim() const { return hidden * (bidirectional ? 2u : 1u); }

    void validate() const {
        require(input_dim > 0 && hidden > 0 && layers > 0 && window_len > 0 &&
                    head_hidden > 0 && head_layers > 0,
                "ArchDescriptor: all dimensions must be positive");
    }
};

class ParamGroup {
  public:
    ParamGroup() = default;
    explicit ParamGroup(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    std::size_t count() const { return values_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    void add(const std::string& pname, Tensor value) {
        require(index_.find(pname) == index_.end(), "ParamGroup::add: duplicate name " + pname);
        index_[pname] = values_.size();
        names_.push_back(pname);
        values_.push_back(std::move(value));
    }

    Tensor& param(const std::string& pname) { return values_[find(pname)]; }
    const Tensor& param(const std::string& pname) const { return values_[find(pname)]; }
    Tensor& param_at(std::size_t i) { return values_[i]; }
    const Tensor& param_at(std::size_t i) const { return values_[i]; }

    std::size_t find(const std::string& pname) const {
        auto it = index_.find(pname);
        require(it != index_.end(), "ParamGroup: unknown parameter " + name_ + "." + pname);
        return it->second;
    }

    void fill(double v) {
        for (Tensor& t : values_) t.fill(v);
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const Tensor& t : values_) n += t.size();
        return n;
    }

    bool shape_compatible(const ParamGroup& other) const {
        if (names_ != other.names_) return false;
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!values_[i].same_shape(other.values_[i])) return false;
        return true;
    }

    void copy_values_from(const ParamGroup& other) {
        require(shape_compatible(other), "ParamGroup::copy_values_from: layouts disagree");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = other.values_[i];
    }

  private:
    std::string name_;
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct ModelBundle {
    ArchDescriptor arch;
    ParamGroup encoder_source{"encoder_source"};
    ParamGroup encoder_target{"encoder_target"};
    ParamGroup decoder{"decoder"};
    ParamGroup discriminator{"discriminator"};
    ParamGroup predictor{"predictor"};

    ParamGroup& group(const std::string& gname) {
        if (gname == "encoder_source") return encoder_source;
        if (gname == "encoder_target") return encoder_target;
        if (gname == "decoder") return decoder;
        if (gname == "discriminator") return discriminator;
        if (gname == "predictor") return predictor;
        throw ContractViolation("ModelBundle: unknown group " + gname);
    }
    const ParamGroup& group(const std::string& gname) const {
        return const_cast<ModelBundle*>(this)->group(gname);
    }
};

namespace detail {

// weights uniform in +-1/sqrt(fan_in); biases start at zero
inline Tensor init_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    return random_uniform({fan_in, fan_out}, -bound, bound, rng);
}

inline void add_lstm_layer(ParamGroup& g, const std::string& prefix, std::size_t in_dim,
                           std::size_t hidden, Rng& rng) {
    Rng r_ih = rng.split(prefix + ".w_ih");
    Rng r_hh = rng.split(prefix + ".w_hh");
    g.add(prefix + ".w_ih", init_weight(in_dim, 4 * hidden, r_ih));
    g.add(prefix + ".w_hh", init_weight(hidden, 4 * hidden, r_hh));
    g.add(prefix + ".bias", Tensor::zeros({4 * hidden}));
}

inline void add_encoder_params(ParamGroup& g, const ArchDescriptor& a, Rng& rng) {
    for (std::size_t layer = 0; layer < a.layers; ++layer) {
        const std::size_t in_dim = layer == 0 ? a.input_dim : a.feature_dim();
        const std::string base = "l" + std::to_string(layer);
        add_lstm_layer(g, base + ".fwd", in_dim, a.hidden, rng);
        if (a.bidirectional) add_lstm_layer(g, base + ".bwd", in_dim, a.hidden, rng);
    }
}

inline void add_head_params(ParamGroup& g, std::size_t in_dim, const ArchDescriptor& a,
                            Rng& rng) {
    std::size_t cur = in_dim;
    for (std::size_t i = 0; i < a.head_layers; ++i) {
        const std::string base = "fc" + std::to_string(i);
        Rng r = rng.split(base + ".w");
        g.add(base + ".w", init_weight(cur, a.head_hidden, r));
        g.add(base + ".b", Tensor::zeros({a.head_hidden}));
        cur = a.head_hidden;
    }
    Rng r = rng.split("out.w");
    g.add("out.w", init_weight(cur, 1, r));
    g.add("out.b", Tensor::zeros({1}));
}

inline void add_decoder_params(ParamGroup& g, const ArchDescriptor& a, Rng& rng) {
    add_lstm_layer(g, "cell", a.feature_dim(), a.hidden, rng);
    Rng r = rng.split("out.w");
    g.add("out.w", init_weight(a.hidden, a.input_dim, r));
    g.add("out.b", Tensor::zeros({a.input_dim}));
}

}  // namespace detail

inline ModelBundle make_model(const ArchDescriptor& arch, std::uint64_t seed) {
    arch.validate();
    ModelBundle m;
    m.arch = arch;
    Rng root(seed);
    Rng r_es = root.split("encoder_source");
    Rng r_et = root.split("encoder_target");
    Rng r_dec = root.split("decoder");
    Rng r_dis = root.split("discriminator");
    Rng r_pred = root.split("predictor");
    detail::add_encoder_params(m.encoder_source, arch, r_es);
    detail::add_encoder_params(m.encoder_target, arch, r_et);
    detail::add_decoder_params(m.decoder, arch, r_dec);
    detail::add_head_params(m.discriminator, arch.feature_dim(), arch, r_dis);
    detail::add_head_params(m.predictor, arch.feature_dim(), arch, r_pred);
    return m;
}

// Parameters lifted onto a tape for one training step. Vars align with the
// group's parameter order.
struct TapedGroup {
    const ParamGroup* group = nullptr;
    std::vector<ad::Var> vars;

    ad::Var operator[](const std::string& pname) const { return vars[group->find(pname)]; }
};

inline TapedGroup lift(ad::Tape& tape, const ParamGroup& g, bool requires_grad) {
    TapedGroup tg;
    tg.group = &g;
    tg.vars.reserve(g.count());
    for (std::size_t i = 0; i < g.count(); ++i)
        tg.vars.push_back(tape.leaf(g.param_at(i), requires_grad));
    return tg;
}

inline std::vector<Tensor> collect_grads(const ad::Tape& tape, const TapedGroup& tg) {
    std::vector<Tensor> gs;
    gs.reserve(tg.vars.size());
    for (ad::Var v : tg.vars) gs.push_back(tape.grad(v));
    return gs;
}

namespace detail {

// One LSTM direction over precomputed step inputs; returns per-step h.
inline std::vector<ad::Var> lstm_direction(ad::Tape& t, const std::vector<ad::Var>& xs,
                                           ad::Var w_ih, ad::Var w_hh, ad::Var bias,
                                           std::size_t hidden, bool reverse) {
    const std::size_t L = xs.size();
    const std::size_t B = t.value(xs[0]).rows();
    ad::Var h = t.constant(Tensor::matrix(B, hidden));
    ad::Var c = t.constant(Tensor::matrix(B, hidden));
    std::vector<ad::Var> out(L);
    for (std::size_t s = 0; s < L; ++s) {
        const std::size_t step = reverse ? L - 1 - s : s;
        ad::Var gates =
            t.add_rowvec(t.add(t.matmul(xs[step], w_ih), t.matmul(h, w_hh)), bias);
        ad::Var gi = t.sigmoid_(t.slice_cols(gates, 0, hidden));
        ad::Var gf = t.sigmoid_(t.slice_cols(gates, hidden, 2 * hidden));
        ad::Var gg = t.tanh_(t.slice_cols(gates, 2 * hidden, 3 * hidden));
        ad::Var go = t.sigmoid_(t.slice_cols(gates, 3 * hidden, 4 * hidden));
        c = t.add(t.mul(gf, c), t.mul(gi, gg));
        h = t.mul(go, t.tanh_(c));
        out[step] = h;
    }
    return out;
}

inline std::vector<ad::Var> window_steps(ad::Tape& t, const ArchDescriptor& a,
                                         const std::vector<Tensor>& windows) {
    require(!windows.empty(), "encode_batch: empty batch");
    const std::size_t B = windows.size();
    std::vector<ad::Var> xs(a.window_len);
    for (std::size_t step = 0; step < a.window_len; ++step) {
        Tensor x({B, a.input_dim});
        for (std::size_t b = 0; b < B; ++b) {
            require(windows[b].rank() == 2 && windows[b].rows() == a.input_dim &&
                        windows[b].cols() == a.window_len,
                    "encode_batch: window shape does not match the descriptor");
            for (std::size_t m = 0; m < a.input_dim; ++m) x.at(b, m) = windows[b].at(m, step);
        }
        xs[step] = t.constant(std::move(x));
    }
    return xs;
}

}  // namespace detail

// Recurrent encoder: B windows (each M x L) -> B x feature_dim.
inline ad::Var encode_batch(ad::Tape& t, const TapedGroup& enc, const ArchDescriptor& a,
                            const std::vector<Tensor>& windows) {
    std::vector<ad::Var> xs = detail::window_steps(t, a, windows);
    ad::Var last_fwd{}, last_bwd{};
    for (std::size_t layer = 0; layer < a.layers; ++layer) {
        const std::string base = "l" + std::to_string(layer);
        std::vector<ad::Var> hf = detail::lstm_direction(
            t, xs, enc[base + ".fwd.w_ih"], enc[base + ".fwd.w_hh"], enc[base + ".fwd.bias"],
            a.hidden, false);
        if (a.bidirectional) {
            std::vector<ad::Var> hb = detail::lstm_direction(
                t, xs, enc[base + ".bwd.w_ih"], enc[base + ".bwd.w_hh"],
                enc[base + ".bwd.bias"], a.hidden, true);
            for (std::size_t s = 0; s < xs.size(); ++s) xs[s] = t.hconcat(hf[s], hb[s]);
            last_fwd = hf.back();
            last_bwd = hb.front();
        } else {
            xs = hf;
            last_fwd = hf.back();
        }
    }
    return a.bidirectional ? t.hconcat(last_fwd, last_bwd) : last_fwd;
}

// Sequence decoder: feature fed as the input of every step, per-step linear
// read-out. Returns L nodes of shape B x M.
inline std::vector<ad::Var> decode_batch(ad::Tape& t, const TapedGroup& dec,
                                         const ArchDescriptor& a, ad::Var feature) {
    require(t.value(feature).rank() == 2 && t.value(feature).cols() == a.feature_dim(),
            "decode_batch: feature width does not match the descriptor");
    std::vector<ad::Var> xs(a.window_len, feature);
    std::vector<ad::Var> hs = detail::lstm_direction(t, xs, dec["cell.w_ih"], dec["cell.w_hh"],
                                                     dec["cell.bias"], a.hidden, false);
    std::vector<ad::Var> out;
    out.reserve(hs.size());
    for (ad::Var h : hs) out.push_back(ad::affine(t, h, dec["out.w"], dec["out.b"]));
    return out;
}

inline constexpr double kProbClamp = 1e-7;

// Feed-forward head ending in a sigmoid; B x F -> B x 1.
inline ad::Var head_batch(ad::Tape& t, const TapedGroup& head, const ArchDescriptor& a,
                          ad::Var x, bool clamp_probability) {
    require(t.value(x).rank() == 2 && t.value(x).cols() == a.feature_dim(),
            "head_batch: feature width does not match the descriptor");
    ad::Var cur = x;
    for (std::size_t i = 0; i < a.head_layers; ++i) {
        const std::string base = "fc" + std::to_string(i);
        cur = t.relu_(ad::affine(t, cur, head[base + ".w"], head[base + ".b"]));
    }
    cur = t.sigmoid_(ad::affine(t, cur, head["out.w"], head["out.b"]));
    return clamp_probability ? t.clamp(cur, kProbClamp, 1.0 - kProbClamp) : cur;
}

// Tape-free single-sample wrappers.

inline Tensor encoder_forward(const ParamGroup& enc, const ArchDescriptor& a,
                              const Tensor& window) {
    ad::Tape t;
    TapedGroup tg = lift(t, enc, false);
    ad::Var f = encode_batch(t, tg, a, {window});
    Tensor out({a.feature_dim()});
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = t.value(f)[i];
    return out;
}

inline Tensor decoder_forward(const ParamGroup& dec, const ArchDescriptor& a, const Tensor& f) {
    require(f.size() == a.feature_dim(), "decoder_forward: feature length mismatch");
    ad::Tape t;
    TapedGroup tg = lift(t, dec, false);
    Tensor frow({1, a.feature_dim()});
    for (std::size_t i = 0; i < f.size(); ++i) frow[i] = f[i];
    std::vector<ad::Var> steps = decode_batch(t, tg, a, t.constant(std::move(frow)));
    Tensor recon({a.input_dim, a.window_len});
    for (std::size_t s = 0; s < steps.size(); ++s)
        for (std::size_t m = 0; m < a.input_dim; ++m) recon.at(m, s) = t.value(steps[s]).at(0, m);
    return recon;
}

namespace detail {
inline double head_forward_scalar(const ParamGroup& head, const ArchDescriptor& a,
                                  const Tensor& f, bool clamp_probability) {
    require(f.size() == a.feature_dim(), "head forward: feature length mismatch");
    ad::Tape t;
    TapedGroup tg = lift(t, head, false);
    Tensor frow({1, a.feature_dim()});
    for (std::size_t i = 0; i < f.size(); ++i) frow[i] = f[i];
    ad::Var p = head_batch(t, tg, a, t.constant(std::move(frow)), clamp_probability);
    return t.value(p)[0];
}
}  // namespace detail

inline double discriminator_forward(const ParamGroup& d, const ArchDescriptor& a,
                                    const Tensor& f) {
    return detail::head_forward_scalar(d, a, f, true);
}

inline double predictor_forward(const ParamGroup& r, const ArchDescriptor& a, const Tensor& f) {
    return detail::head_forward_scalar(r, a, f, false);
}

}  // namespace tacda
