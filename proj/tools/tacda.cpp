// Command-line front end: dataset ingestion and synthesis, stage analysis,
// clustering, pretraining, adaptation, evaluation, gradient checking, and
// the variant benchmark. Exit codes: 0 success, 1 contract or IO failure,
// 2 usage error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tacda/benchmark.hpp"
#include "tacda/config.hpp"
#include "tacda/data.hpp"
#include "tacda/gradcheck.hpp"
#include "tacda/metrics.hpp"
#include "tacda/pipeline.hpp"
#include "tacda/serialize.hpp"
#include "tacda/stages.hpp"
#include "tacda/synth.hpp"

namespace {

using nlohmann::json;

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw tacda::IoError("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw tacda::IoError("write failed: " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tacda::IoError("cannot open " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw tacda::ParseError("invalid JSON in " + path + ": " + e.what());
    }
}

tacda::RunConfig resolve_config(const std::string& path, tacda::RunConfig base = {}) {
    return path.empty() ? base : tacda::load_run_config(path, std::move(base));
}

// arch width and window length always come from the data
void resolve_arch(tacda::AdaptConfig& cfg, const tacda::Dataset& ds) {
    cfg.arch.input_dim = ds.input_dim();
    cfg.arch.window_len = ds.window_len();
}

struct SynthArgs {
    std::string config, out;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int cmd_synth(const SynthArgs& a) {
    tacda::RunConfig rc = resolve_config(a.config);
    if (a.seed_set) rc.synth.seed = a.seed;
    rc.synth.validate();
    const tacda::SynthResult res = tacda::synth_generate(rc.synth);
    tacda::dataset_save(a.out + "/source", res.source, &res.source_truth);
    tacda::dataset_save(a.out + "/target", res.target, &res.target_truth);
    json j{{"config", tacda::run_config_json(rc)},
           {"seed", rc.synth.seed},
           {"source_windows", res.source.size()},
           {"target_windows", res.target.size()}};
    write_json_file(a.out + "/synth.json", j);
    std::printf("synth: %zu source / %zu target windows -> %s\n", res.source.size(),
                res.target.size(), a.out.c_str());
    return 0;
}

struct IngestArgs {
    std::string input, out, config;
    std::string domain = "source";
    std::vector<int> sensors;
    double cap = 0.0;
    std::size_t window = 0, stride = 0;
};

int cmd_ingest(const IngestArgs& a) {
    tacda::RunConfig rc = resolve_config(a.config);
    if (!a.sensors.empty()) rc.data.sensors = a.sensors;
    if (a.cap > 0.0) rc.data.rul_cap = a.cap;
    if (a.window > 0) rc.data.window_len = a.window;
    if (a.stride > 0) rc.data.stride = a.stride;
    rc.data.validate();

    const std::vector<tacda::UnitRecord> units = tacda::load_cmapss(a.input);
    auto [series, man] = tacda::preprocess(units, rc.data.sensors, rc.data.rul_cap);
    tacda::Dataset ds = tacda::make_windows(series, man, rc.data.window_len, rc.data.stride);
    for (int s : rc.data.sensors) ds.sensor_names.push_back("s" + std::to_string(s));
    if (a.domain == "target") {
        const tacda::TruthTable truth = tacda::detach_labels(ds);
        tacda::dataset_save(a.out, ds, &truth);
    } else {
        tacda::dataset_save(a.out, ds);
    }
    std::printf("ingest: %zu units -> %zu %s windows -> %s (skipped units: %zu)\n", units.size(),
                ds.size(), a.domain.c_str(), a.out.c_str(), ds.manifest.skipped_units);
    return 0;
}

struct StagesArgs {
    std::string source, out, config;
    std::size_t bins = 100;
    double sigma = 2.0;
};

int cmd_stages(const StagesArgs& a) {
    const tacda::RunConfig rc = resolve_config(a.config);
    const tacda::Dataset src = tacda::dataset_load(a.source);
    tacda::require(src.domain == tacda::DomainTag::source,
                   "stages: a labeled source dataset is required");
    const std::vector<tacda::StageAssignment> labels =
        tacda::label_source_stages(src, rc.adapt.sluggish_boundary, rc.adapt.terminal_boundary);
    const auto [hi_model, hi] = tacda::fit_health_index(src);
    std::vector<double> life_frac;
    for (const tacda::SensorWindow& w : src.windows) life_frac.push_back(*w.life_fraction);
    const tacda::HealthIndexCurve curve =
        tacda::hi_second_derivative(life_frac, hi, a.bins, a.sigma);

    std::vector<std::string> stage_names;
    std::size_t counts[3] = {0, 0, 0};
    for (const tacda::StageAssignment& s : labels) {
        stage_names.push_back(tacda::stage_name(s.stage));
        ++counts[static_cast<std::size_t>(s.stage)];
    }
    json j{{"config", tacda::run_config_json(rc)},
           {"seed", src.manifest.seed},
           {"n_windows", src.size()},
           {"stage", stage_names},
           {"stage_counts",
            {{"sluggish", counts[0]}, {"accelerated", counts[1]}, {"terminal", counts[2]}}},
           {"health_index",
            {{"values", hi},
             {"life_fraction", life_frac},
             {"weights", hi_model.weights},
             {"intercept", hi_model.intercept},
             {"r2", hi_model.r2},
             {"ridge_fallback", hi_model.ridge_fallback},
             {"low_fit", hi_model.low_fit}}},
           {"curve",
            {{"bin_count", curve.bin_count},
             {"averaged_hi", curve.averaged_hi},
             {"smoothed_hi", curve.smoothed_hi},
             {"second_derivative", curve.second_derivative},
             {"empty_bins", curve.empty_bins},
             {"smoothing_radius", curve.smoothing_radius}}}};
    write_json_file(a.out, j);
    std::printf("stages: %zu windows (sluggish %zu / accelerated %zu / terminal %zu), r2 %.4f -> %s\n",
                src.size(), counts[0], counts[1], counts[2], hi_model.r2, a.out.c_str());
    return 0;
}

struct ClusterArgs {
    std::string data, out, config;
    std::size_t k = 3;
    double gamma = 0.1;
    std::uint64_t seed = 1;
    std::size_t max_iter = 50;
};

int cmd_cluster(const ClusterArgs& a) {
    const tacda::RunConfig rc = resolve_config(a.config);
    const tacda::Dataset ds = tacda::dataset_load(a.data);
    const std::vector<tacda::Tensor> windows = tacda::window_values(ds);
    const tacda::ClusterResult cr =
        tacda::kmeans_softdtw(windows, a.k, a.gamma, a.max_iter, a.seed);
    const std::vector<tacda::ClusterStats> stats = tacda::per_cluster_stats(windows, cr);

    json clusters = json::array();
    std::vector<double> variances;
    for (std::size_t c = 0; c < stats.size(); ++c) {
        variances.push_back(stats[c].total_var);
        clusters.push_back({{"cluster", c},
                            {"members", stats[c].member_count},
                            {"total_var", stats[c].total_var},
                            {"per_sensor_var", stats[c].per_sensor_var}});
    }
    json j{{"config", tacda::run_config_json(rc)},
           {"k", a.k},
           {"gamma", a.gamma},
           {"seed", a.seed},
           {"max_iter", a.max_iter},
           {"data_seed", ds.manifest.seed},
           {"assignments", cr.assignments},
           {"iterations_run", cr.iterations_run},
           {"distance_evals", cr.distance_evals},
           {"reseeded_clusters", cr.reseeded_clusters},
           {"clusters", clusters}};
    if (a.k == 3) {
        const tacda::StageRanking ranking = tacda::rank_stages(variances);
        json mapping = json::object();
        for (std::size_t c = 0; c < 3; ++c)
            mapping[std::to_string(c)] = tacda::stage_name(ranking.stage_of_cluster[c]);
        std::vector<std::string> window_stages;
        for (std::size_t w : cr.assignments)
            window_stages.push_back(tacda::stage_name(ranking.stage_of_cluster[w]));
        j["stage_of_cluster"] = mapping;
        j["stage"] = window_stages;
        j["variance_tie"] = ranking.tie_break;
    }
    write_json_file(a.out, j);
    std::printf("cluster: k=%zu, %zu iterations, %zu distance evals -> %s\n", a.k,
                cr.iterations_run, cr.distance_evals, a.out.c_str());
    return 0;
}

json report_artifact(const tacda::RunConfig& rc, const tacda::RunReport& rep) {
    return json{{"config", tacda::run_config_json(rc)},
                {"seed", rep.seed},
                {"report", tacda::run_report_json(rep, true)}};
}

struct PretrainArgs {
    std::string source, config, out;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int cmd_pretrain(const PretrainArgs& a) {
    tacda::RunConfig rc = resolve_config(a.config);
    if (a.seed_set) rc.adapt.seed = a.seed;
    const tacda::Dataset src = tacda::dataset_load(a.source);
    resolve_arch(rc.adapt, src);
    rc.adapt.validate();

    const auto t0 = std::chrono::steady_clock::now();
    tacda::Checkpoint ck;
    ck.model = tacda::make_model(rc.adapt.arch, rc.adapt.seed);
    ck.config_hash = tacda::adapt_config_hash(rc.adapt);
    tacda::RunReport rep;
    rep.seed = rc.adapt.seed;
    rep.config_hash = ck.config_hash;
    rep.phases.push_back(tacda::pretrain_phase(ck, src, rc.adapt, rep.warnings));
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    tacda::checkpoint_save(a.out, ck);
    write_json_file(a.out + ".report.json", report_artifact(rc, rep));
    const std::vector<double>& mse = rep.phases[0].mse;
    std::printf("pretrain: %zu epochs, final mse %.6g -> %s\n", rep.phases[0].epochs,
                mse.empty() ? 0.0 : mse.back(), a.out.c_str());
    return 0;
}

struct AdaptArgs {
    std::string source, target, pretrained, config, out;
    std::string exclude_stage;
    double lambda = -1.0;
    bool skip_round2 = false;
    bool force = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int cmd_adapt(const AdaptArgs& a) {
    tacda::RunConfig rc = resolve_config(a.config);
    if (a.seed_set) rc.adapt.seed = a.seed;
    const tacda::Dataset src = tacda::dataset_load(a.source);
    const tacda::Dataset tgt = tacda::dataset_load(a.target);
    tacda::require(src.domain == tacda::DomainTag::source && tgt.domain == tacda::DomainTag::target,
                   "adapt: --source must hold a source dataset and --target a target dataset");
    tacda::require(src.input_dim() == tgt.input_dim() && src.window_len() == tgt.window_len(),
                   "adapt: source and target window shapes differ");
    resolve_arch(rc.adapt, tgt);
    rc.adapt.validate();

    tacda::Checkpoint ck = tacda::checkpoint_load(a.pretrained);
    const std::string expected = tacda::adapt_config_hash(rc.adapt);
    if (ck.config_hash != expected && !a.force) {
        std::fprintf(stderr,
                     "tacda: refusing to adapt: checkpoint %s was trained under config hash %s, "
                     "but the resolved config hashes to %s.\nPass the same config file (and seed) "
                     "used for pretraining, or --force to proceed anyway; command-line overrides "
                     "below are applied after this check and recorded in the output.\n",
                     a.pretrained.c_str(), ck.config_hash.c_str(), expected.c_str());
        return 1;
    }
    if (a.lambda >= 0.0) rc.adapt.lambda = a.lambda;
    if (a.skip_round2) rc.adapt.without_round2 = true;
    if (!a.exclude_stage.empty())
        rc.adapt.exclude_target_stage = tacda::stage_from_name(a.exclude_stage);
    rc.adapt.validate();

    tacda::require(ck.model.arch.input_dim == rc.adapt.arch.input_dim &&
                       ck.model.arch.window_len == rc.adapt.arch.window_len,
                   "adapt: checkpoint architecture does not match the datasets");

    const auto t0 = std::chrono::steady_clock::now();
    tacda::RunReport rep;
    rep.seed = rc.adapt.seed;
    rep.config_hash = tacda::adapt_config_hash(rc.adapt);
    ck.config_hash = rep.config_hash;
    tacda::StagePairing pairing;
    tacda::adapt_rounds(ck, src, tgt, rc.adapt, rep, &pairing);
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    tacda::checkpoint_save(a.out, ck);
    json artifact = report_artifact(rc, rep);
    json pairs = json::array();
    for (const tacda::StagePair& p : pairing.pairs)
        pairs.push_back({{"stage", tacda::stage_name(p.stage)},
                         {"source_windows", p.source_windows.size()},
                         {"target_windows", p.target_windows.size()}});
    std::vector<std::string> skipped;
    for (tacda::Stage s : pairing.skipped) skipped.push_back(tacda::stage_name(s));
    artifact["stage_pairs"] = pairs;
    artifact["skipped_stages"] = skipped;
    write_json_file(a.out + ".report.json", artifact);

    for (const std::string& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("adapt: %zu phases, %zu stage pairs -> %s\n", rep.phases.size(),
                pairing.pairs.size(), a.out.c_str());
    return 0;
}

struct EvaluateArgs {
    std::string model, data, out, compare;
    bool source_encoder = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const tacda::Checkpoint ck = tacda::checkpoint_load(a.model);
    const tacda::Dataset ds = tacda::dataset_load(a.data);
    tacda::require(ck.model.arch.input_dim == ds.input_dim() &&
                       ck.model.arch.window_len == ds.window_len(),
                   "evaluate: checkpoint architecture does not match the dataset");

    std::vector<double> y_true;
    if (ds.domain == tacda::DomainTag::source) {
        for (const tacda::SensorWindow& w : ds.windows) y_true.push_back(*w.rul_label);
    } else {
        tacda::require(tacda::has_truth(a.data),
                       "evaluate: target dataset has no truth.json with held-out labels");
        y_true = tacda::truth_load(a.data).rul_label;
    }
    const bool use_target = !a.source_encoder;
    const std::vector<double> preds = tacda::predict(ck.model, ds, use_target);
    const tacda::EvalReport rep = tacda::evaluate_rul(y_true, preds, ds.manifest.rul_cap);

    json j{{"model", a.model},
           {"model_config_hash", ck.config_hash},
           {"data_seed", ds.manifest.seed},
           {"domain", tacda::domain_name(ds.domain)},
           {"encoder", use_target ? "target" : "source"},
           {"report", tacda::eval_report_json(rep)}};
    write_json_file(a.out, j);
    std::printf("evaluate: rmse %.4f cycles, score %.4f over %zu windows -> %s\n", rep.rmse,
                rep.score, rep.n, a.out.c_str());

    if (!a.compare.empty()) {
        const json other = read_json_file(a.compare);
        const double orm = other.at("report").at("rmse").get<double>();
        const double osc = other.at("report").at("score").get<double>();
        std::printf("\n%-28s %12s %12s\n", "report", "rmse", "score");
        std::printf("%-28s %12.4f %12.4f\n", a.out.c_str(), rep.rmse, rep.score);
        std::printf("%-28s %12.4f %12.4f\n", a.compare.c_str(), orm, osc);
        std::printf("%-28s %12.4f %12.4f\n", "delta (this - other)", rep.rmse - orm,
                    rep.score - osc);
        if (orm > 0.0)
            std::printf("relative rmse change: %+.2f%%\n", 100.0 * (rep.rmse - orm) / orm);
    }
    return 0;
}

int cmd_gradcheck() {
    const std::vector<tacda::checks::SuiteResult> suites{
        tacda::checks::softdtw_oracle_suite(500, 42),
        tacda::checks::softdtw_gradient_suite(100, 42),
        tacda::checks::hard_dtw_limit_suite(100, 42), tacda::checks::autodiff_graph_suite(42)};
    bool all_pass = true;
    for (const tacda::checks::SuiteResult& s : suites) {
        std::printf("%-30s %4zu cases  worst %.3e  tolerance %.0e  %s\n", s.name.c_str(), s.cases,
                    s.worst, s.tolerance, s.pass ? "PASS" : "FAIL");
        all_pass = all_pass && s.pass;
    }
    std::printf("gradcheck: %s\n", all_pass ? "all suites passed" : "FAILURES detected");
    return all_pass ? 0 : 1;
}

struct BenchmarkArgs {
    std::string config, out;
    std::size_t seeds = 0;
    std::uint64_t first_seed = 0;
    bool first_seed_set = false;
};

int cmd_benchmark(const BenchmarkArgs& a) {
    tacda::RunConfig rc = resolve_config(a.config, tacda::benchmark_default_config());
    if (a.seeds > 0) rc.benchmark.seeds = a.seeds;
    if (a.first_seed_set) rc.benchmark.first_seed = a.first_seed;
    rc.benchmark.validate();
    rc.synth.validate();

    const tacda::BenchmarkReport rep = tacda::run_benchmark(rc);
    std::printf("%s", tacda::benchmark_table(rep).c_str());
    std::printf("seeds:");
    for (std::uint64_t s : rep.seeds) std::printf(" %llu", static_cast<unsigned long long>(s));
    std::printf("  wall %.1fs  warnings %zu\n", rep.wall_seconds, rep.warnings.size());
    if (!a.out.empty()) {
        json j{{"config", tacda::run_config_json(rc)},
               {"report", tacda::benchmark_report_json(rep, true)}};
        write_json_file(a.out, j);
        std::printf("benchmark report -> %s\n", a.out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TACDA: two-round adversarial domain adaptation for RUL prediction"};
    app.require_subcommand(1);
    int code = 0;

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic source/target pair");
    synth->add_option("--config", synth_args.config, "key=value config file");
    synth->add_option("--out", synth_args.out, "output directory")->required();
    CLI::Option* synth_seed = synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->callback([&] {
        synth_args.seed_set = synth_seed->count() > 0;
        code = cmd_synth(synth_args);
    });

    IngestArgs ingest_args;
    CLI::App* ingest = app.add_subcommand("ingest", "window a C-MAPSS text file into a dataset");
    ingest->add_option("--input", ingest_args.input, "C-MAPSS 26-column text file")
        ->required()
        ->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_args.out, "output dataset directory")->required();
    ingest->add_option("--config", ingest_args.config, "key=value config file");
    ingest->add_option("--domain", ingest_args.domain, "source (labeled) or target")
        ->check(CLI::IsMember({"source", "target"}));
    ingest->add_option("--sensors", ingest_args.sensors, "1-based sensor indices (subset of 1..21)");
    ingest->add_option("--cap", ingest_args.cap, "RUL cap in cycles");
    ingest->add_option("--window", ingest_args.window, "window length");
    ingest->add_option("--stride", ingest_args.stride, "window stride");
    ingest->callback([&] { code = cmd_ingest(ingest_args); });

    StagesArgs stages_args;
    CLI::App* stages = app.add_subcommand("stages", "label source stages and export the HI curve");
    stages->add_option("--source", stages_args.source, "labeled source dataset directory")
        ->required();
    stages->add_option("--out", stages_args.out, "output JSON path")->required();
    stages->add_option("--config", stages_args.config, "key=value config file");
    stages->add_option("--bins", stages_args.bins, "health index bins");
    stages->add_option("--sigma", stages_args.sigma, "Gaussian smoothing sigma (in bins)");
    stages->callback([&] { code = cmd_stages(stages_args); });

    ClusterArgs cluster_args;
    CLI::App* cluster = app.add_subcommand("cluster", "soft-DTW k-means over a dataset's windows");
    cluster->add_option("--data", cluster_args.data, "dataset directory")->required();
    cluster->add_option("--out", cluster_args.out, "output JSON path")->required();
    cluster->add_option("--config", cluster_args.config, "key=value config file");
    cluster->add_option("--k", cluster_args.k, "number of clusters");
    cluster->add_option("--gamma", cluster_args.gamma, "soft-DTW smoothing");
    cluster->add_option("--seed", cluster_args.seed, "seeding RNG seed");
    cluster->add_option("--max-iter", cluster_args.max_iter, "iteration cap");
    cluster->callback([&] { code = cmd_cluster(cluster_args); });

    PretrainArgs pre_args;
    CLI::App* pretrain = app.add_subcommand("pretrain", "supervised source pretraining");
    pretrain->add_option("--source", pre_args.source, "labeled source dataset directory")
        ->required();
    pretrain->add_option("--config", pre_args.config, "key=value config file");
    pretrain->add_option("--out", pre_args.out, "output checkpoint path")->required();
    CLI::Option* pre_seed = pretrain->add_option("--seed", pre_args.seed, "training seed");
    pretrain->callback([&] {
        pre_args.seed_set = pre_seed->count() > 0;
        code = cmd_pretrain(pre_args);
    });

    AdaptArgs adapt_args;
    CLI::App* adapt = app.add_subcommand("adapt", "two-round adversarial adaptation");
    adapt->add_option("--source", adapt_args.source, "labeled source dataset directory")
        ->required();
    adapt->add_option("--target", adapt_args.target, "unlabeled target dataset directory")
        ->required();
    adapt->add_option("--pretrained", adapt_args.pretrained, "pretrained checkpoint")->required();
    adapt->add_option("--config", adapt_args.config, "key=value config file");
    adapt->add_option("--out", adapt_args.out, "output checkpoint path")->required();
    adapt->add_option("--lambda", adapt_args.lambda, "reconstruction weight override");
    adapt->add_flag("--skip-round2", adapt_args.skip_round2, "stop after the first round");
    adapt->add_option("--exclude-target-stage", adapt_args.exclude_stage,
                      "drop this cluster-identified target stage before pairing")
        ->check(CLI::IsMember({"sluggish", "accelerated", "terminal"}));
    adapt->add_flag("--force", adapt_args.force, "proceed despite a config hash mismatch");
    CLI::Option* adapt_seed = adapt->add_option("--seed", adapt_args.seed, "training seed");
    adapt->callback([&] {
        adapt_args.seed_set = adapt_seed->count() > 0;
        code = cmd_adapt(adapt_args);
    });

    EvaluateArgs eval_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint against a dataset");
    evaluate->add_option("--model", eval_args.model, "checkpoint path")->required();
    evaluate->add_option("--data", eval_args.data, "dataset directory")->required();
    evaluate->add_option("--out", eval_args.out, "output report JSON")->required();
    evaluate->add_option("--compare", eval_args.compare, "earlier report to diff against");
    evaluate->add_flag("--source-encoder", eval_args.source_encoder,
                       "predict through the source encoder");
    evaluate->callback([&] { code = cmd_evaluate(eval_args); });

    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "oracle and finite-difference verification suites");
    gradcheck->callback([&] { code = cmd_gradcheck(); });

    BenchmarkArgs bench_args;
    CLI::App* benchmark =
        app.add_subcommand("benchmark", "Source / w/o C / w/o D_T / TACDA over seeded replicas");
    benchmark->add_option("--config", bench_args.config, "key=value config file");
    benchmark->add_option("--out", bench_args.out, "output report JSON");
    benchmark->add_option("--seeds", bench_args.seeds, "number of seeds");
    CLI::Option* bench_first =
        benchmark->add_option("--first-seed", bench_args.first_seed, "first seed value");
    benchmark->callback([&] {
        bench_args.first_seed_set = bench_first->count() > 0;
        code = cmd_benchmark(bench_args);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int cli_code = app.exit(e);
        return cli_code == 0 ? 0 : 2;
    } catch (const tacda::ContractViolation& e) {
        std::fprintf(stderr, "tacda: error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "tacda: error: %s\n", e.what());
        return 1;
    }
    return code;
}
