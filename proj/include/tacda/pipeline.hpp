#pragma once

// Training orchestration: source pretraining, the alternating adversarial
// adaptation round (discriminator, decoder, target encoder, in that order),
// and the staged two-round pipeline with warm starts.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacda/adam.hpp"
#include "tacda/autodiff.hpp"
#include "tacda/data.hpp"
#include "tacda/error.hpp"
#include "tacda/nets.hpp"
#include "tacda/rng.hpp"
#include "tacda/serialize.hpp"
#include "tacda/stages.hpp"
#include "tacda/tensor.hpp"

namespace tacda {

struct AdaptConfig {
    ArchDescriptor arch;
    double gamma = 0.1;
    double lambda = 0.1;
    double lr_encoder = 5e-5;
    double lr_pretrain = 0.0;  // 0 means follow lr_encoder
    double lr_discriminator = 5e-5;
    double lr_decoder = 5e-3;
    std::size_t batch_size = 256;
    std::size_t pretrain_epochs = 100;
    std::size_t round1_epochs = 120;
    std::size_t round2_epochs_per_stage = 60;
    std::uint64_t seed = 1;

    // encoder's adversarial term: maximize log D(f_T) (label_flip) or
    // literally minimize the full minimax objective
    enum class Adversarial { label_flip, literal_minimax };
    Adversarial adversarial_variant = Adversarial::label_flip;

    double sluggish_boundary = kSluggishBoundary;
    double terminal_boundary = kTerminalBoundary;
    std::size_t stage_clusters = 3;
    std::size_t kmeans_max_iter = 50;

    bool without_decoder = false;  // ablation: drop the reconstruction path entirely
    bool without_round2 = false;   // ablation: stop after the first adaptation round
    bool reinit_discriminator_per_stage = false;
    bool strict_stage_reset = false;  // restart E_T from E_S for every stage pair
    // insufficient-data analysis: drop this cluster-identified target stage
    // before pairing, so adaptation runs on the shared stages only
    std::optional<Stage> exclude_target_stage;

    void validate() const {
        arch.validate();
        require(gamma > 0.0, "AdaptConfig: gamma must be positive");
        require(lambda >= 0.0, "AdaptConfig: lambda must be non-negative");
        require(lr_encoder > 0.0 && lr_discriminator > 0.0 && lr_decoder > 0.0,
                "AdaptConfig: learning rates must be positive");
        require(lr_pretrain >= 0.0, "AdaptConfig: lr_pretrain must be non-negative");
        require(batch_size >= 1, "AdaptConfig: batch_size must be at least 1");
        require(sluggish_boundary > 0.0 && sluggish_boundary < terminal_boundary &&
                    terminal_boundary <= 1.0,
                "AdaptConfig: stage boundaries must satisfy 0 < sluggish < terminal <= 1");
        require(stage_clusters >= 1, "AdaptConfig: stage_clusters must be at least 1");
        require(kmeans_max_iter >= 1, "AdaptConfig: kmeans_max_iter must be at least 1");
    }
};

inline const char* adversarial_name(AdaptConfig::Adversarial v) {
    return v == AdaptConfig::Adversarial::label_flip ? "label-flip" : "literal-minimax";
}

inline std::string adapt_config_canonical(const AdaptConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "adversarial_variant=" << adversarial_name(c.adversarial_variant) << '\n'
       << "arch.bidirectional=" << c.arch.bidirectional << '\n'
       << "arch.head_hidden=" << c.arch.head_hidden << '\n'
       << "arch.head_layers=" << c.arch.head_layers << '\n'
       << "arch.hidden=" << c.arch.hidden << '\n'
       << "arch.input_dim=" << c.arch.input_dim << '\n'
       << "arch.layers=" << c.arch.layers << '\n'
       << "arch.window_len=" << c.arch.window_len << '\n'
       << "batch_size=" << c.batch_size << '\n'
       << "exclude_target_stage="
       << (c.exclude_target_stage ? stage_name(*c.exclude_target_stage) : "none") << '\n'
       << "gamma=" << c.gamma << '\n'
       << "kmeans_max_iter=" << c.kmeans_max_iter << '\n'
       << "lambda=" << c.lambda << '\n'
       << "lr_decoder=" << c.lr_decoder << '\n'
       << "lr_discriminator=" << c.lr_discriminator << '\n'
       << "lr_encoder=" << c.lr_encoder << '\n'
       << "lr_pretrain=" << c.lr_pretrain << '\n'
       << "pretrain_epochs=" << c.pretrain_epochs << '\n'
       << "reinit_discriminator_per_stage=" << c.reinit_discriminator_per_stage << '\n'
       << "round1_epochs=" << c.round1_epochs << '\n'
       << "round2_epochs_per_stage=" << c.round2_epochs_per_stage << '\n'
       << "seed=" << c.seed << '\n'
       << "sluggish_boundary=" << c.sluggish_boundary << '\n'
       << "stage_clusters=" << c.stage_clusters << '\n'
       << "strict_stage_reset=" << c.strict_stage_reset << '\n'
       << "terminal_boundary=" << c.terminal_boundary << '\n'
       << "without_decoder=" << c.without_decoder << '\n'
       << "without_round2=" << c.without_round2 << '\n';
    return os.str();
}

inline std::string adapt_config_hash(const AdaptConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(adapt_config_canonical(c))));
    return std::string(buf);
}

struct PhaseReport {
    std::string name;
    std::size_t epochs = 0;
    std::vector<double> mse;            // pretraining loss trace
    std::vector<double> adversarial;    // domain objective per epoch (batch mean)
    std::vector<double> soft_dtw;       // decoder reconstruction loss per epoch
    std::vector<double> disc_accuracy;  // held-out probe accuracy per epoch
};

struct RunReport {
    std::vector<PhaseReport> phases;
    std::vector<std::string> warnings;
    std::string config_hash;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

inline nlohmann::json phase_report_json(const PhaseReport& p) {
    return nlohmann::json{{"name", p.name},
                          {"epochs", p.epochs},
                          {"mse", p.mse},
                          {"adversarial", p.adversarial},
                          {"soft_dtw", p.soft_dtw},
                          {"disc_accuracy", p.disc_accuracy}};
}

// Wall-clock timing lives under a separate key so the deterministic payload
// can be compared across reruns.
inline nlohmann::json run_report_json(const RunReport& r, bool include_timing = true) {
    nlohmann::json j{{"config_hash", r.config_hash},
                     {"seed", r.seed},
                     {"warnings", r.warnings}};
    j["phases"] = nlohmann::json::array();
    for (const PhaseReport& p : r.phases) j["phases"].push_back(phase_report_json(p));
    if (include_timing) j["timing"] = {{"wall_seconds", r.wall_seconds}};
    return j;
}

inline std::vector<Tensor> window_values(const Dataset& ds) {
    std::vector<Tensor> out;
    out.reserve(ds.size());
    for (const SensorWindow& w : ds.windows) out.push_back(w.values);
    return out;
}

namespace detail {

// Indices for one epoch: shuffled copies of the pool, concatenated until
// `need` draws are available.
inline std::vector<std::size_t> epoch_plan(const std::vector<std::size_t>& pool, std::size_t need,
                                           Rng rng) {
    std::vector<std::size_t> out;
    out.reserve(need);
    std::vector<std::size_t> perm = pool;
    while (out.size() < need) {
        rng.shuffle(perm);
        for (std::size_t i : perm) {
            out.push_back(i);
            if (out.size() == need) break;
        }
    }
    return out;
}

inline std::vector<Tensor> gather(const std::vector<Tensor>& pool,
                                  const std::vector<std::size_t>& plan, std::size_t offset,
                                  std::size_t count) {
    std::vector<Tensor> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(pool[plan[offset + i]]);
    return out;
}

inline Tensor encode_features(const ParamGroup& enc, const ArchDescriptor& a,
                              const std::vector<Tensor>& windows) {
    ad::Tape t;
    TapedGroup tg = lift(t, enc, false);
    return t.value(encode_batch(t, tg, a, windows));
}

inline std::vector<double> head_scores(const ParamGroup& head, const ArchDescriptor& a,
                                       const Tensor& feats, bool clamp) {
    ad::Tape t;
    TapedGroup tg = lift(t, head, false);
    ad::Var p = head_batch(t, tg, a, t.constant(feats), clamp);
    const Tensor& v = t.value(p);
    std::vector<double> out(v.rows());
    for (std::size_t b = 0; b < v.rows(); ++b) out[b] = v.at(b, 0);
    return out;
}

inline AdamState& ensure_optim(Checkpoint& ck, const std::string& group, double rate) {
    AdamState& st = ck.optim[group];
    if (!st.initialized()) st.init_like(ck.model.group(group), rate);
    return st;
}

// Fraction of probe windows the discriminator classifies correctly
// (source above 0.5, target at or below).
inline double probe_accuracy(const ModelBundle& m, const std::vector<Tensor>& probe_s,
                             const std::vector<Tensor>& probe_t) {
    const Tensor fs = encode_features(m.encoder_source, m.arch, probe_s);
    const Tensor ft = encode_features(m.encoder_target, m.arch, probe_t);
    const std::vector<double> ps = head_scores(m.discriminator, m.arch, fs, true);
    const std::vector<double> pt = head_scores(m.discriminator, m.arch, ft, true);
    std::size_t correct = 0;
    for (double p : ps) correct += p > 0.5;
    for (double p : pt) correct += p <= 0.5;
    return static_cast<double>(correct) / static_cast<double>(ps.size() + pt.size());
}

}  // namespace detail

// Domain-classification objective on fixed feature batches (rows are windows).
inline double adversarial_value(const ParamGroup& disc, const ArchDescriptor& a, const Tensor& fs,
                                const Tensor& ft) {
    ad::Tape t;
    TapedGroup d = lift(t, disc, false);
    ad::Var ps = head_batch(t, d, a, t.constant(fs), true);
    ad::Var pt = head_batch(t, d, a, t.constant(ft), true);
    return t.value_scalar(t.add(t.mean(t.log_(ps)), t.mean(t.log_(t.rsub_scalar(1.0, pt)))));
}

struct TaOptions {
    std::string phase = "round1";
    std::size_t epochs = 0;
    bool fresh_encoder = false;  // copy E_S into E_T and reset its optimizer
    std::vector<std::string>* update_trace = nullptr;  // appends "D", "D_T", "E_T"
};

// One adaptation round: per batch, (1) the discriminator ascends the
// adversarial objective, (2) the decoder descends the soft-DTW
// reconstruction loss, (3) the target encoder descends its combined loss.
// The source encoder and predictor are never touched.
inline PhaseReport ta_round(Checkpoint& ck, const AdaptConfig& cfg, const std::vector<Tensor>& xs,
                            const std::vector<Tensor>& xt, const TaOptions& opt,
                            std::vector<std::string>& warnings) {
    require(!xs.empty() && !xt.empty(), "ta_round: both domains need at least one window");
    ModelBundle& m = ck.model;
    const ArchDescriptor& a = m.arch;

    if (opt.fresh_encoder) {
        m.encoder_target.copy_values_from(m.encoder_source);
        ck.optim.erase("encoder_target");
    }
    AdamState& opt_enc = detail::ensure_optim(ck, "encoder_target", cfg.lr_encoder);
    AdamState& opt_disc = detail::ensure_optim(ck, "discriminator", cfg.lr_discriminator);
    AdamState& opt_dec = detail::ensure_optim(ck, "decoder", cfg.lr_decoder);

    PhaseReport rep;
    rep.name = opt.phase;
    rep.epochs = opt.epochs;
    if (opt.epochs == 0) return rep;

    // held-out discriminator probe, one fixed split per round
    auto split_probe = [&](std::size_t n, const char* dom, std::vector<std::size_t>& train,
                           std::vector<std::size_t>& probe) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        if (n >= 5) {
            Rng r = Rng(cfg.seed).split("ta." + opt.phase + ".probe." + dom);
            r.shuffle(idx);
            const std::size_t np = n / 5;
            probe.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(np));
            train.assign(idx.begin() + static_cast<std::ptrdiff_t>(np), idx.end());
            std::sort(train.begin(), train.end());
            std::sort(probe.begin(), probe.end());
        } else {
            train = idx;
            probe = idx;
            warnings.push_back("ta_round(" + opt.phase + "): discriminator probe overlaps " +
                               dom + " training windows (fewer than 5)");
        }
    };
    std::vector<std::size_t> train_s, probe_s_idx, train_t, probe_t_idx;
    split_probe(xs.size(), "source", train_s, probe_s_idx);
    split_probe(xt.size(), "target", train_t, probe_t_idx);
    std::vector<Tensor> probe_s, probe_t;
    for (std::size_t i : probe_s_idx) probe_s.push_back(xs[i]);
    for (std::size_t i : probe_t_idx) probe_t.push_back(xt[i]);

    const std::size_t beff = std::min({cfg.batch_size, train_s.size(), train_t.size()});
    if (beff < cfg.batch_size)
        warnings.push_back("ta_round(" + opt.phase + "): batch size shrunk to " +
                           std::to_string(beff) + " (dataset smaller than batch_size)");
    const std::size_t nb =
        (std::max(train_s.size(), train_t.size()) + beff - 1) / beff;

    const bool reconstruct = !cfg.without_decoder && cfg.lambda > 0.0;
    const bool train_decoder = !cfg.without_decoder;

    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        const std::vector<std::size_t> plan_s = detail::epoch_plan(
            train_s, nb * beff, Rng(cfg.seed).split("ta." + opt.phase + ".shuffle.source", epoch));
        const std::vector<std::size_t> plan_t = detail::epoch_plan(
            train_t, nb * beff, Rng(cfg.seed).split("ta." + opt.phase + ".shuffle.target", epoch));
        double adv_sum = 0.0, sdtw_sum = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            const std::vector<Tensor> batch_s = detail::gather(xs, plan_s, b * beff, beff);
            const std::vector<Tensor> batch_t = detail::gather(xt, plan_t, b * beff, beff);
            const Tensor fs = detail::encode_features(m.encoder_source, a, batch_s);
            const Tensor ft = detail::encode_features(m.encoder_target, a, batch_t);

            {  // (1) discriminator ascends the domain objective
                ad::Tape t;
                TapedGroup d = lift(t, m.discriminator, true);
                ad::Var ps = head_batch(t, d, a, t.constant(fs), true);
                ad::Var pt = head_batch(t, d, a, t.constant(ft), true);
                ad::Var ladv =
                    t.add(t.mean(t.log_(ps)), t.mean(t.log_(t.rsub_scalar(1.0, pt))));
                adv_sum += t.value_scalar(ladv);
                t.backward(t.scale(ladv, -1.0));
                opt_disc.apply(m.discriminator, collect_grads(t, d));
                if (opt.update_trace) opt.update_trace->push_back("D");
            }

            if (train_decoder) {  // (2) decoder descends the reconstruction loss
                ad::Tape t;
                TapedGroup dec = lift(t, m.decoder, true);
                std::vector<ad::Var> steps = decode_batch(t, dec, a, t.constant(ft));
                ad::Var loss = t.soft_dtw_batch_loss(steps, batch_t, cfg.gamma);
                sdtw_sum += t.value_scalar(loss);
                t.backward(loss);
                opt_dec.apply(m.decoder, collect_grads(t, dec));
                if (opt.update_trace) opt.update_trace->push_back("D_T");
            }

            {  // (3) target encoder descends adversarial + lambda * soft-DTW
                ad::Tape t;
                TapedGroup enc = lift(t, m.encoder_target, true);
                TapedGroup d = lift(t, m.discriminator, false);
                ad::Var f = encode_batch(t, enc, a, batch_t);
                ad::Var pt = head_batch(t, d, a, f, true);
                ad::Var loss =
                    cfg.adversarial_variant == AdaptConfig::Adversarial::label_flip
                        ? t.scale(t.mean(t.log_(pt)), -1.0)
                        : t.mean(t.log_(t.rsub_scalar(1.0, pt)));
                if (reconstruct) {
                    TapedGroup dec = lift(t, m.decoder, false);
                    std::vector<ad::Var> steps = decode_batch(t, dec, a, f);
                    loss = t.add(loss, t.scale(t.soft_dtw_batch_loss(steps, batch_t, cfg.gamma),
                                               cfg.lambda));
                }
                t.backward(loss);
                opt_enc.apply(m.encoder_target, collect_grads(t, enc));
                if (opt.update_trace) opt.update_trace->push_back("E_T");
            }
        }
        rep.adversarial.push_back(adv_sum / static_cast<double>(nb));
        rep.soft_dtw.push_back(train_decoder ? sdtw_sum / static_cast<double>(nb) : 0.0);
        rep.disc_accuracy.push_back(detail::probe_accuracy(m, probe_s, probe_t));
    }
    return rep;
}

// Supervised warm start: minimize batch MSE of R(E_S(x)) against normalized
// RUL labels.
inline PhaseReport pretrain_phase(Checkpoint& ck, const Dataset& source, const AdaptConfig& cfg,
                                  std::vector<std::string>& warnings) {
    require(source.domain == DomainTag::source && !source.windows.empty(),
            "pretrain: labeled source windows required");
    ModelBundle& m = ck.model;
    const ArchDescriptor& a = m.arch;
    require(a.input_dim == source.input_dim() && a.window_len == source.window_len(),
            "pretrain: dataset shape does not match the architecture");

    const std::size_t N = source.size();
    std::vector<Tensor> xs = window_values(source);
    std::vector<double> labels(N);
    for (std::size_t i = 0; i < N; ++i) {
        require(source.windows[i].rul_label.has_value(), "pretrain: window lacks a RUL label");
        labels[i] = *source.windows[i].rul_label;
    }

    const double lr = cfg.lr_pretrain > 0.0 ? cfg.lr_pretrain : cfg.lr_encoder;
    AdamState& opt_enc = detail::ensure_optim(ck, "encoder_source", lr);
    AdamState& opt_pred = detail::ensure_optim(ck, "predictor", lr);

    PhaseReport rep;
    rep.name = "pretrain";
    rep.epochs = cfg.pretrain_epochs;
    if (cfg.pretrain_epochs == 0) return rep;

    const std::size_t beff = std::min(cfg.batch_size, N);
    if (beff < cfg.batch_size)
        warnings.push_back("pretrain: batch size shrunk to " + std::to_string(beff) +
                           " (dataset smaller than batch_size)");
    const std::size_t nb = (N + beff - 1) / beff;
    std::vector<std::size_t> all(N);
    std::iota(all.begin(), all.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
        const std::vector<std::size_t> plan =
            detail::epoch_plan(all, nb * beff, Rng(cfg.seed).split("pretrain.shuffle", epoch));
        double mse_sum = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            const std::vector<Tensor> batch = detail::gather(xs, plan, b * beff, beff);
            Tensor y({beff, 1});
            for (std::size_t i = 0; i < beff; ++i) y.at(i, 0) = labels[plan[b * beff + i]];

            ad::Tape t;
            TapedGroup enc = lift(t, m.encoder_source, true);
            TapedGroup pred = lift(t, m.predictor, true);
            ad::Var f = encode_batch(t, enc, a, batch);
            ad::Var yhat = head_batch(t, pred, a, f, false);
            ad::Var diff = t.sub(yhat, t.constant(std::move(y)));
            ad::Var loss = t.mean(t.mul(diff, diff));
            mse_sum += t.value_scalar(loss);
            t.backward(loss);
            opt_enc.apply(m.encoder_source, collect_grads(t, enc));
            opt_pred.apply(m.predictor, collect_grads(t, pred));
        }
        rep.mse.push_back(mse_sum / static_cast<double>(nb));
    }
    return rep;
}

struct StageAnalysis {
    ClusterResult clusters;
    std::vector<double> variances;
    StageRanking ranking;
    std::vector<StageAssignment> target_stages;
};

inline StageAnalysis analyze_target_stages(const std::vector<Tensor>& xt,
                                           const AdaptConfig& cfg) {
    Rng cr = Rng(cfg.seed).split("tacda.cluster");
    StageAnalysis an;
    an.clusters =
        kmeans_softdtw(xt, cfg.stage_clusters, cfg.gamma, cfg.kmeans_max_iter, cr.next_u64());
    for (const ClusterStats& st : per_cluster_stats(xt, an.clusters))
        an.variances.push_back(st.total_var);
    an.ranking = rank_stages(an.variances);
    an.target_stages = cluster_stage_assignments(an.clusters, an.ranking);
    return an;
}

// Adaptation rounds on an already-pretrained checkpoint: round 1 on the full
// domains, then one warm-started round per paired degradation stage.
inline void adapt_rounds(Checkpoint& ck, const Dataset& source, const Dataset& target,
                         const AdaptConfig& cfg, RunReport& rep,
                         StagePairing* pairing_out = nullptr) {
    require(!target.windows.empty(), "adapt_rounds: target windows required");
    std::vector<Tensor> xs = window_values(source);
    std::vector<Tensor> xt = window_values(target);

    TaOptions r1;
    r1.phase = "round1";
    r1.epochs = cfg.round1_epochs;
    r1.fresh_encoder = true;
    rep.phases.push_back(ta_round(ck, cfg, xs, xt, r1, rep.warnings));

    if (pairing_out) *pairing_out = StagePairing{};
    if (cfg.without_round2 || cfg.round2_epochs_per_stage == 0) {
        rep.warnings.push_back("second round disabled; keeping the first-round model");
        return;
    }

    const std::vector<StageAssignment> src_stages =
        label_source_stages(source, cfg.sluggish_boundary, cfg.terminal_boundary);
    StageAnalysis an = analyze_target_stages(xt, cfg);
    if (an.ranking.tie_break)
        rep.warnings.push_back("cluster variance tie; stage ranking is low-confidence");
    if (!an.clusters.reseeded_clusters.empty())
        rep.warnings.push_back("k-means reseeded " +
                               std::to_string(an.clusters.reseeded_clusters.size()) +
                               " empty cluster(s)");

    std::vector<StageAssignment> tgt_stages = an.target_stages;
    if (cfg.exclude_target_stage) {
        const Stage drop = *cfg.exclude_target_stage;
        std::erase_if(tgt_stages, [&](const StageAssignment& sa) { return sa.stage == drop; });
        rep.warnings.push_back(std::string("excluding target stage ") + stage_name(drop) +
                               " from adaptation (insufficient-data analysis)");
    }

    StagePairing pairing = pair_stages(src_stages, tgt_stages);
    for (Stage s : pairing.skipped)
        rep.warnings.push_back(std::string("stage ") + stage_name(s) +
                               " pair skipped: no windows on one side");
    if (pairing.pairs.empty())
        rep.warnings.push_back("no shared stages; keeping the first-round model");
    if (pairing_out) *pairing_out = pairing;

    for (const StagePair& p : pairing.pairs) {
        if (cfg.reinit_discriminator_per_stage) {
            Rng rr = Rng(cfg.seed).split(std::string("tacda.reinit.") + stage_name(p.stage));
            ModelBundle fresh = make_model(cfg.arch, rr.next_u64());
            ck.model.discriminator.copy_values_from(fresh.discriminator);
            ck.model.decoder.copy_values_from(fresh.decoder);
            ck.optim.erase("discriminator");
            ck.optim.erase("decoder");
        }
        std::vector<Tensor> xs_c, xt_c;
        for (std::size_t i : p.source_windows) xs_c.push_back(xs[i]);
        for (std::size_t i : p.target_windows) xt_c.push_back(xt[i]);
        TaOptions r2;
        r2.phase = std::string("round2.") + stage_name(p.stage);
        r2.epochs = cfg.round2_epochs_per_stage;
        r2.fresh_encoder = cfg.strict_stage_reset;
        rep.phases.push_back(ta_round(ck, cfg, xs_c, xt_c, r2, rep.warnings));
    }
}

struct TacdaResult {
    Checkpoint checkpoint;
    RunReport report;
    StagePairing pairing;
};

// Full pipeline: pretrain, adapt on the whole domains, stage both sides,
// then refine per shared stage.
inline TacdaResult run_tacda(const Dataset& source, const Dataset& target, const AdaptConfig& cfg) {
    cfg.validate();
    source.validate();
    target.validate();
    require(source.domain == DomainTag::source, "tacda: first dataset must be the source");
    require(target.domain == DomainTag::target, "tacda: second dataset must be the target");
    require(cfg.arch.input_dim == target.input_dim() &&
                cfg.arch.window_len == target.window_len(),
            "tacda: target dataset shape does not match the architecture");

    const auto t0 = std::chrono::steady_clock::now();
    TacdaResult res;
    res.checkpoint.model = make_model(cfg.arch, cfg.seed);
    res.checkpoint.config_hash = adapt_config_hash(cfg);
    res.report.seed = cfg.seed;
    res.report.config_hash = res.checkpoint.config_hash;

    res.report.phases.push_back(
        pretrain_phase(res.checkpoint, source, cfg, res.report.warnings));
    adapt_rounds(res.checkpoint, source, target, cfg, res.report, &res.pairing);

    res.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// Normalized RUL estimates R(E(x)) per window.
inline std::vector<double> predict(const ModelBundle& m, const Dataset& ds,
                                   bool use_target_encoder = true) {
    require(!ds.windows.empty(), "predict: empty dataset");
    const ParamGroup& enc = use_target_encoder ? m.encoder_target : m.encoder_source;
    std::vector<double> out;
    out.reserve(ds.size());
    const std::size_t chunk = 256;
    for (std::size_t i0 = 0; i0 < ds.size(); i0 += chunk) {
        const std::size_t i1 = std::min(ds.size(), i0 + chunk);
        std::vector<Tensor> ws;
        ws.reserve(i1 - i0);
        for (std::size_t i = i0; i < i1; ++i) ws.push_back(ds.windows[i].values);
        const Tensor f = detail::encode_features(enc, m.arch, ws);
        for (double v : detail::head_scores(m.predictor, m.arch, f, false)) out.push_back(v);
    }
    return out;
}

inline std::vector<double> denormalize_rul(const std::vector<double>& norm, double rul_cap) {
    require(rul_cap > 0.0, "denormalize_rul: cap must be positive");
    std::vector<double> out(norm.size());
    for (std::size_t i = 0; i < norm.size(); ++i) out[i] = norm[i] * rul_cap;
    return out;
}

}  // namespace tacda
