#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tacda/benchmark.hpp"
#include "tacda/config.hpp"
#include "tacda/pipeline.hpp"

using namespace tacda;

TEST_CASE("empty config keeps documented defaults", "[config]") {
    const RunConfig rc = parse_run_config("");
    CHECK(rc.adapt.gamma == 0.1);
    CHECK(rc.adapt.lambda == 0.1);
    CHECK(rc.adapt.lr_pretrain == 0.0);
    CHECK(rc.adapt.batch_size == 256);
    CHECK(rc.adapt.seed == 1);
    CHECK(rc.adapt.adversarial_variant == AdaptConfig::Adversarial::label_flip);
    CHECK_FALSE(rc.adapt.exclude_target_stage.has_value());
    CHECK(rc.synth.units_per_domain == 24);
    CHECK(rc.synth.shift.sensor_scale == 1.5);
    CHECK(rc.synth.shift.time_warp == 1.3);
    CHECK(rc.data.window_len == 30);
    CHECK(rc.data.sensors == default_sensor_subset());
    CHECK(rc.benchmark.seeds == 5);
    CHECK(rc.benchmark.first_seed == 1);
    rc.validate();
}

TEST_CASE("sections, flat keys, and comments parse", "[config]") {
    const std::string text =
        "# experiment settings\n"
        "adapt.gamma = 0.25\n"
        "\n"
        "[synth]\n"
        "mean_life = 33   # trailing comment\n"
        "time_warp = 1.1\n"
        "[arch]\n"
        "hidden=4\n"
        "bidirectional = true\n"
        "[adapt]\n"
        "exclude_target_stage = terminal\n"
        "adversarial_variant = literal-minimax\n"
        "lr_pretrain = 0.002\n"
        "[data]\n"
        "sensors = 2, 3,4\n"
        "source_dir = /tmp/src\n";
    const RunConfig rc = parse_run_config(text);
    CHECK(rc.adapt.gamma == 0.25);
    CHECK(rc.synth.mean_life == 33);
    CHECK(rc.synth.shift.time_warp == 1.1);
    CHECK(rc.adapt.arch.hidden == 4);
    CHECK(rc.adapt.arch.bidirectional);
    REQUIRE(rc.adapt.exclude_target_stage.has_value());
    CHECK(*rc.adapt.exclude_target_stage == Stage::terminal);
    CHECK(rc.adapt.adversarial_variant == AdaptConfig::Adversarial::literal_minimax);
    CHECK(rc.adapt.lr_pretrain == 0.002);
    CHECK(rc.data.sensors == std::vector<int>{2, 3, 4});
    CHECK(rc.data.source_dir == "/tmp/src");
}

TEST_CASE("unknown and malformed keys are rejected", "[config]") {
    CHECK_THROWS_AS(parse_run_config("adapt.gmma = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("[foo]\nbar = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("gamma = 0.1\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("adapt.gamma\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("[adapt\ngamma = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("[]\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("= 3\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("adapt.gamma = abc\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("adapt.gamma = 0.1x\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("adapt.seed = -1\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("adapt.without_decoder = maybe\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("adapt.exclude_target_stage = early\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("adapt.adversarial_variant = gan\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("data.sensors = 2,x\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("data.sensors = \n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("[adapt]\ngamma = 1\ngamma = 2\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("adapt.gamma = 1\n[adapt]\ngamma = 2\n"), ParseError);
}

TEST_CASE("parsing layers over a caller-provided base", "[config]") {
    RunConfig base = benchmark_default_config();
    const RunConfig rc = parse_run_config("synth.mean_life = 44\n", base);
    CHECK(rc.synth.mean_life == 44);
    CHECK(rc.synth.units_per_domain == base.synth.units_per_domain);
    CHECK(rc.adapt.arch.hidden == base.adapt.arch.hidden);
}

TEST_CASE("config files load from disk", "[config]") {
    const std::string dir = std::filesystem::temp_directory_path() / "tacda_cfg_test";
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/run.cfg";
    {
        std::ofstream out(path);
        out << "[adapt]\nseed = 7\nlambda = 0.05\n";
    }
    const RunConfig rc = load_run_config(path);
    CHECK(rc.adapt.seed == 7);
    CHECK(rc.adapt.lambda == 0.05);
    CHECK_THROWS_AS(load_run_config(dir + "/missing.cfg"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("resolved config echo covers every section", "[config]") {
    RunConfig rc;
    rc.adapt.lambda = 0.3;
    rc.adapt.exclude_target_stage = Stage::accelerated;
    rc.synth.mean_life = 55;
    const nlohmann::json j = run_config_json(rc);
    CHECK(j.at("adapt").at("lambda") == 0.3);
    CHECK(j.at("adapt").at("exclude_target_stage") == "accelerated");
    CHECK(j.at("adapt").at("adversarial_variant") == "label-flip");
    CHECK(j.at("arch").at("hidden") == rc.adapt.arch.hidden);
    CHECK(j.at("synth").at("mean_life") == 55);
    CHECK(j.at("synth").at("sensor_scale") == 1.5);
    CHECK(j.at("data").at("window_len") == 30);
    CHECK(j.at("benchmark").at("seeds") == 5);
    const nlohmann::json again = run_config_json(rc);
    CHECK(j.dump() == again.dump());
}

TEST_CASE("variant configs map onto the ablation flags", "[config]") {
    const AdaptConfig base;
    const AdaptConfig src = bench_variant_config(base, BenchVariant::source_only);
    CHECK(src.round1_epochs == 0);
    CHECK(src.without_round2);
    const AdaptConfig woc = bench_variant_config(base, BenchVariant::without_c);
    CHECK(woc.without_round2);
    CHECK_FALSE(woc.without_decoder);
    CHECK(woc.round1_epochs == base.round1_epochs);
    const AdaptConfig wod = bench_variant_config(base, BenchVariant::without_dt);
    CHECK(wod.without_decoder);
    CHECK_FALSE(wod.without_round2);
    const AdaptConfig full = bench_variant_config(base, BenchVariant::tacda);
    CHECK_FALSE(full.without_decoder);
    CHECK_FALSE(full.without_round2);
    CHECK(std::string(bench_variant_name(BenchVariant::source_only)) == "Source");
    CHECK(std::string(bench_variant_name(BenchVariant::without_c)) == "w/o C");
    CHECK(std::string(bench_variant_name(BenchVariant::without_dt)) == "w/o D_T");
    CHECK(std::string(bench_variant_name(BenchVariant::tacda)) == "TACDA");
}

namespace {

RunConfig tiny_benchmark_config() {
    RunConfig rc;
    rc.synth.units_per_domain = 4;
    rc.synth.sensors = 3;
    rc.synth.mean_life = 30;
    rc.synth.window_len = 10;
    rc.synth.stride = 3;
    rc.adapt.arch.hidden = 4;
    rc.adapt.arch.head_hidden = 4;
    rc.adapt.arch.head_layers = 1;
    rc.adapt.batch_size = 16;
    rc.adapt.lr_encoder = 1e-3;
    rc.adapt.lr_discriminator = 1e-3;
    rc.adapt.pretrain_epochs = 2;
    rc.adapt.round1_epochs = 2;
    rc.adapt.round2_epochs_per_stage = 1;
    rc.adapt.kmeans_max_iter = 10;
    rc.benchmark.seeds = 1;
    rc.benchmark.first_seed = 3;
    return rc;
}

}  // namespace

TEST_CASE("benchmark reports all variants and reruns identically", "[config][benchmark]") {
    const RunConfig rc = tiny_benchmark_config();
    const BenchmarkReport rep = run_benchmark(rc);
    REQUIRE(rep.seeds == std::vector<std::uint64_t>{3});
    REQUIRE(rep.variants.size() == 4);
    CHECK(rep.variants[0].name == "Source");
    CHECK(rep.variants[1].name == "w/o C");
    CHECK(rep.variants[2].name == "w/o D_T");
    CHECK(rep.variants[3].name == "TACDA");
    for (const VariantSummary& vs : rep.variants) {
        REQUIRE(vs.rmse.size() == 1);
        REQUIRE(vs.score.size() == 1);
        CHECK(vs.rmse_mean == vs.rmse[0]);
        CHECK(vs.rmse_std == 0.0);
        CHECK(vs.rmse[0] >= 0.0);
        CHECK(vs.score[0] >= 0.0);
    }
    const BenchmarkReport again = run_benchmark(rc);
    CHECK(benchmark_report_json(rep, false).dump() == benchmark_report_json(again, false).dump());
    const std::string table = benchmark_table(rep);
    CHECK(table.find("TACDA") != std::string::npos);
    CHECK(table.find("rmse_mean") != std::string::npos);
}

TEST_CASE("benchmark TACDA row matches a direct pipeline run", "[config][benchmark]") {
    const RunConfig rc = tiny_benchmark_config();
    const BenchmarkReport rep = run_benchmark(rc);

    SynthConfig sc = rc.synth;
    sc.seed = rc.benchmark.first_seed;
    const SynthResult data = synth_generate(sc);
    AdaptConfig cfg = rc.adapt;
    cfg.seed = rc.benchmark.first_seed;
    cfg.arch.input_dim = data.source.input_dim();
    cfg.arch.window_len = data.source.window_len();
    const TacdaResult direct = run_tacda(data.source, data.target, cfg);
    const std::vector<double> preds = predict(direct.checkpoint.model, data.target, true);
    const EvalReport ev =
        evaluate_rul(data.target_truth.rul_label, preds, data.target.manifest.rul_cap);
    CHECK(rep.variants[3].rmse[0] == ev.rmse);
    CHECK(rep.variants[3].score[0] == ev.score);

    // encoder_source and the predictor stay frozen through adaptation, so
    // the adapted bundle still reproduces the Source row via that path
    const std::vector<double> src_preds = predict(direct.checkpoint.model, data.target, false);
    const EvalReport src_ev =
        evaluate_rul(data.target_truth.rul_label, src_preds, data.target.manifest.rul_cap);
    CHECK(rep.variants[0].rmse[0] == src_ev.rmse);
    CHECK(rep.variants[0].score[0] == src_ev.score);
}

TEST_CASE("benchmark default config is desk-sized and valid", "[config][benchmark]") {
    const RunConfig rc = benchmark_default_config();
    rc.validate();
    CHECK(rc.synth.shift.sensor_scale == 1.5);
    CHECK(rc.synth.shift.time_warp == 1.3);
    CHECK(rc.benchmark.seeds == 5);
    CHECK(rc.adapt.pretrain_epochs <= 500);
    CHECK(rc.synth.units_per_domain <= 24);
}
