#pragma once

// Variant benchmark over seeded synthetic domain pairs: Source (unadapted),
// w/o C (no second round), w/o D_T (no target decoder), and the full
// pipeline, in that fixed report order. Per seed, all variants share one
// generated domain pair and one pretrained model, so the comparison is
// paired; everything downstream of pretraining matches what run_tacda
// would produce under the same variant config and seed.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacda/config.hpp"
#include "tacda/error.hpp"
#include "tacda/metrics.hpp"
#include "tacda/pipeline.hpp"
#include "tacda/serialize.hpp"
#include "tacda/synth.hpp"

namespace tacda {

enum class BenchVariant { source_only = 0, without_c = 1, without_dt = 2, tacda = 3 };

inline const std::vector<BenchVariant>& bench_variant_order() {
    static const std::vector<BenchVariant> order{BenchVariant::source_only,
                                                 BenchVariant::without_c,
                                                 BenchVariant::without_dt, BenchVariant::tacda};
    return order;
}

inline const char* bench_variant_name(BenchVariant v) {
    switch (v) {
        case BenchVariant::source_only: return "Source";
        case BenchVariant::without_c: return "w/o C";
        case BenchVariant::without_dt: return "w/o D_T";
        case BenchVariant::tacda: return "TACDA";
    }
    return "?";
}

inline AdaptConfig bench_variant_config(AdaptConfig base, BenchVariant v) {
    switch (v) {
        case BenchVariant::source_only:
            base.round1_epochs = 0;
            base.without_round2 = true;
            break;
        case BenchVariant::without_c: base.without_round2 = true; break;
        case BenchVariant::without_dt: base.without_decoder = true; break;
        case BenchVariant::tacda: break;
    }
    return base;
}

// One seed's shared state: the generated domain pair and the pretrained
// model every variant starts from.
struct BenchSeedData {
    SynthResult data;
    AdaptConfig base;
    Checkpoint pretrained;
    PhaseReport pretrain_report;
    std::vector<std::string> pretrain_warnings;
};

inline BenchSeedData bench_prepare_seed(const RunConfig& rc, std::uint64_t seed) {
    BenchSeedData sd;
    SynthConfig sc = rc.synth;
    sc.seed = seed;
    sd.data = synth_generate(sc);
    sd.base = rc.adapt;
    sd.base.seed = seed;
    sd.base.arch.input_dim = sd.data.source.input_dim();
    sd.base.arch.window_len = sd.data.source.window_len();
    sd.base.validate();
    sd.pretrained.model = make_model(sd.base.arch, sd.base.seed);
    sd.pretrain_report = pretrain_phase(sd.pretrained, sd.data.source, sd.base,
                                        sd.pretrain_warnings);
    return sd;
}

struct VariantOutcome {
    double rmse = 0.0;   // cycles, on the target split
    double score = 0.0;
    RunReport report;
    StagePairing pairing;
};

// Runs one variant config against the seed's shared pretrained model.
// Source-only skips adaptation and predicts with the source encoder.
inline VariantOutcome bench_run_variant(const BenchSeedData& sd, const AdaptConfig& cfg,
                                        bool adapted) {
    cfg.validate();
    VariantOutcome out;
    Checkpoint ck = sd.pretrained;
    ck.config_hash = adapt_config_hash(cfg);
    out.report.seed = cfg.seed;
    out.report.config_hash = ck.config_hash;
    out.report.warnings = sd.pretrain_warnings;
    out.report.phases.push_back(sd.pretrain_report);
    if (adapted) adapt_rounds(ck, sd.data.source, sd.data.target, cfg, out.report, &out.pairing);
    const std::vector<double> preds = predict(ck.model, sd.data.target, adapted);
    const EvalReport ev =
        evaluate_rul(sd.data.target_truth.rul_label, preds, sd.data.target.manifest.rul_cap);
    out.rmse = ev.rmse;
    out.score = ev.score;
    return out;
}

struct VariantSummary {
    std::string name;
    std::vector<double> rmse;   // per seed
    std::vector<double> score;  // per seed
    double rmse_mean = 0.0;
    double rmse_std = 0.0;
    double score_mean = 0.0;
    double score_std = 0.0;
};

struct BenchmarkReport {
    std::vector<std::uint64_t> seeds;
    std::vector<VariantSummary> variants;  // fixed order: Source, w/o C, w/o D_T, TACDA
    std::vector<std::string> warnings;     // prefixed "seed S variant: ..."
    double wall_seconds = 0.0;
};

namespace detail {

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

inline BenchmarkReport run_benchmark(const RunConfig& rc) {
    rc.benchmark.validate();
    const auto t0 = std::chrono::steady_clock::now();
    BenchmarkReport rep;
    for (BenchVariant v : bench_variant_order())
        rep.variants.push_back(VariantSummary{bench_variant_name(v), {}, {}, 0, 0, 0, 0});

    for (std::size_t i = 0; i < rc.benchmark.seeds; ++i) {
        const std::uint64_t seed = rc.benchmark.first_seed + i;
        rep.seeds.push_back(seed);
        const BenchSeedData sd = bench_prepare_seed(rc, seed);
        for (std::size_t vi = 0; vi < bench_variant_order().size(); ++vi) {
            const BenchVariant v = bench_variant_order()[vi];
            const AdaptConfig cfg = bench_variant_config(sd.base, v);
            const VariantOutcome out =
                bench_run_variant(sd, cfg, v != BenchVariant::source_only);
            rep.variants[vi].rmse.push_back(out.rmse);
            rep.variants[vi].score.push_back(out.score);
            for (const std::string& w : out.report.warnings)
                rep.warnings.push_back("seed " + std::to_string(seed) + " " +
                                       bench_variant_name(v) + ": " + w);
        }
    }
    for (VariantSummary& vs : rep.variants) {
        vs.rmse_mean = detail::mean_of(vs.rmse);
        vs.rmse_std = detail::sample_std(vs.rmse, vs.rmse_mean);
        vs.score_mean = detail::mean_of(vs.score);
        vs.score_std = detail::sample_std(vs.score, vs.score_mean);
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

inline nlohmann::json benchmark_report_json(const BenchmarkReport& rep,
                                            bool include_timing = true) {
    nlohmann::json variants = nlohmann::json::array();
    for (const VariantSummary& vs : rep.variants)
        variants.push_back({{"name", vs.name},
                            {"rmse", vs.rmse},
                            {"score", vs.score},
                            {"rmse_mean", vs.rmse_mean},
                            {"rmse_std", vs.rmse_std},
                            {"score_mean", vs.score_mean},
                            {"score_std", vs.score_std}});
    nlohmann::json j{{"seeds", rep.seeds}, {"variants", variants}, {"warnings", rep.warnings}};
    if (include_timing) j["timing"] = {{"wall_seconds", rep.wall_seconds}};
    return j;
}

inline std::string benchmark_table(const BenchmarkReport& rep) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %12s %12s %14s %14s\n", "variant", "rmse_mean",
                  "rmse_std", "score_mean", "score_std");
    out += line;
    for (const VariantSummary& vs : rep.variants) {
        std::snprintf(line, sizeof line, "%-10s %12.4f %12.4f %14.4f %14.4f\n", vs.name.c_str(),
                      vs.rmse_mean, vs.rmse_std, vs.score_mean, vs.score_std);
        out += line;
    }
    return out;
}

// Desk-scale defaults for the benchmark subcommand and the acceptance
// suite; sized so the four variants over five seeds finish in a few CPU
// minutes. The domain shift stays at the generator default (sensor scale
// 1.5, time warp 1.3). Windows must span a decent fraction of a unit's
// life or the warp-induced curvature change is invisible, and the
// adversarial rounds want a slow encoder against a fast discriminator or
// the encoder wanders off the pretrained features on unlucky seeds.
inline RunConfig benchmark_default_config() {
    RunConfig rc;
    rc.synth.units_per_domain = 16;
    rc.synth.sensors = 6;
    rc.synth.mean_life = 80;
    rc.synth.window_len = 20;
    rc.synth.stride = 2;
    rc.adapt.arch.hidden = 8;
    rc.adapt.arch.head_hidden = 16;
    rc.adapt.arch.head_layers = 2;
    rc.adapt.batch_size = 64;
    rc.adapt.lambda = 0.5;
    rc.adapt.lr_pretrain = 1e-3;
    rc.adapt.lr_encoder = 2e-5;
    rc.adapt.lr_discriminator = 5e-4;
    rc.adapt.lr_decoder = 5e-3;
    rc.adapt.pretrain_epochs = 300;
    rc.adapt.round1_epochs = 150;
    rc.adapt.round2_epochs_per_stage = 10;
    return rc;
}

}  // namespace tacda
