#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "tacda/data.hpp"
#include "tacda/error.hpp"
#include "tacda/synth.hpp"

using namespace tacda;

namespace {

// one C-MAPSS line: unit, cycle, 3 settings, then sensor s1..s21 = base + sensor index
std::string cmapss_line(long unit, long cycle, double base) {
    std::string line = std::to_string(unit) + " " + std::to_string(cycle) + " 0.1 0.2 0.3";
    for (int s = 1; s <= 21; ++s) line += " " + std::to_string(base + s);
    return line;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::vector<std::string>& lines)
        : path(name) {
        std::ofstream out(path);
        for (const auto& l : lines) out << l << "\n";
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("C-MAPSS loading", "[data]") {
    SECTION("two lines of one unit give one unit with two cycles") {
        TempFile f("tmp_cmapss_ok.txt", {cmapss_line(1, 1, 10.0), cmapss_line(1, 2, 11.0)});
        const auto units = load_cmapss(f.path);
        REQUIRE(units.size() == 1);
        REQUIRE(units[0].unit == 1);
        REQUIRE(units[0].total_cycles() == 2);
        REQUIRE(units[0].sensors[0] == 11.0);
        REQUIRE(units[0].sensors[21] == 12.0);
    }
    SECTION("units come back grouped and cycle-ordered across three units") {
        std::vector<std::string> lines;
        for (long u = 3; u >= 1; --u)
            for (long c = 1; c <= 4; ++c) lines.push_back(cmapss_line(u, c, u * 100.0));
        TempFile f("tmp_cmapss_multi.txt", lines);
        const auto units = load_cmapss(f.path);
        REQUIRE(units.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            REQUIRE(units[i].unit == static_cast<long>(i) + 1);
            REQUIRE(units[i].total_cycles() == 4);
        }
    }
    SECTION("wrong field count names the offending line") {
        TempFile f("tmp_cmapss_short.txt", {cmapss_line(1, 1, 0.0), "1 2 0.1 0.2"});
        try {
            load_cmapss(f.path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SECTION("empty file is rejected") {
        TempFile f("tmp_cmapss_empty.txt", {});
        REQUIRE_THROWS_AS(load_cmapss(f.path), ParseError);
    }
    SECTION("non-consecutive cycles are an integrity error") {
        TempFile f("tmp_cmapss_gap.txt", {cmapss_line(1, 1, 0.0), cmapss_line(1, 3, 0.0)});
        REQUIRE_THROWS_AS(load_cmapss(f.path), ParseError);
    }
    SECTION("missing file reports an IO error") {
        REQUIRE_THROWS_AS(load_cmapss("no_such_file.txt"), IoError);
    }
}

TEST_CASE("preprocessing", "[data]") {
    // unit with sensor 1 rising 10 -> 20 -> 30 and sensor 2 constant
    std::vector<std::string> lines;
    for (long c = 1; c <= 3; ++c) {
        std::string line = "1 " + std::to_string(c) + " 0 0 0";
        line += " " + std::to_string(10.0 * c);  // s1
        line += " 5.0";                          // s2 constant
        for (int s = 3; s <= 21; ++s) line += " " + std::to_string(1.0 * s + c);
        lines.push_back(line);
    }
    TempFile f("tmp_cmapss_pre.txt", lines);
    const auto units = load_cmapss(f.path);

    SECTION("min-max maps {10,20,30} to {0, 0.5, 1}") {
        auto [series, man] = preprocess(units, {1}, 125.0);
        REQUIRE(series.size() == 1);
        REQUIRE(series[0].values.at(0, 0) == 0.0);
        REQUIRE(series[0].values.at(0, 1) == 0.5);
        REQUIRE(series[0].values.at(0, 2) == 1.0);
        REQUIRE(man.sensor_min[0] == 10.0);
        REQUIRE(man.sensor_max[0] == 30.0);
        REQUIRE(man.constant_sensors.empty());
    }
    SECTION("constant sensor flattens to zero and is flagged") {
        auto [series, man] = preprocess(units, {1, 2}, 125.0);
        for (std::size_t t = 0; t < 3; ++t) REQUIRE(series[0].values.at(1, t) == 0.0);
        REQUIRE(man.constant_sensors == std::vector<int>{1});
    }
    SECTION("default subset yields M = 14") {
        auto [series, man] = preprocess(units, default_sensor_subset(), 125.0);
        REQUIRE(series[0].values.rows() == 14);
        REQUIRE(man.sensor_subset.size() == 14);
    }
    SECTION("stored manifest reproduces normalization bit-exactly") {
        auto [series, man] = preprocess(units, default_sensor_subset(), 125.0);
        const auto replay = preprocess_with(units, man);
        REQUIRE(replay.size() == series.size());
        for (std::size_t i = 0; i < series.size(); ++i)
            for (std::size_t k = 0; k < series[i].values.size(); ++k)
                REQUIRE(replay[i].values[k] == series[i].values[k]);
    }
    SECTION("invalid sensor subset and cap are rejected") {
        REQUIRE_THROWS_AS(preprocess(units, {}, 125.0), ContractViolation);
        REQUIRE_THROWS_AS(preprocess(units, {22}, 125.0), ContractViolation);
        REQUIRE_THROWS_AS(preprocess(units, {1}, 0.0), ContractViolation);
    }
}

TEST_CASE("RUL capping rule", "[data]") {
    std::vector<std::string> lines;
    for (long c = 1; c <= 200; ++c) lines.push_back(cmapss_line(1, c, 0.01 * c));
    TempFile f("tmp_cmapss_long.txt", lines);
    const auto units = load_cmapss(f.path);
    auto [series, man] = preprocess(units, {1}, 125.0);
    // cycle 50 of a 200-cycle unit: min(150, 125)/125 = 1
    REQUIRE(series[0].rul[49] == 1.0);
    // cycle 150: min(50, 125)/125 = 0.4
    REQUIRE(series[0].rul[149] == Catch::Approx(0.4).margin(1e-15));
    // final cycle: 0
    REQUIRE(series[0].rul[199] == 0.0);
    REQUIRE(series[0].life_frac[199] == 1.0);
}

TEST_CASE("windowing", "[data]") {
    auto make_unit = [](long id, std::size_t T) {
        UnitSeries s;
        s.unit = id;
        s.values = Tensor({2, T});
        for (std::size_t t = 0; t < T; ++t) {
            s.values.at(0, t) = static_cast<double>(t) / static_cast<double>(T);
            s.values.at(1, t) = 1.0 - s.values.at(0, t);
        }
        s.rul.resize(T);
        s.life_frac.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            s.rul[t] = 1.0 - static_cast<double>(t + 1) / static_cast<double>(T);
            s.life_frac[t] = static_cast<double>(t + 1) / static_cast<double>(T);
        }
        return s;
    };
    PreprocManifest man;
    man.sensor_subset = {1, 2};
    man.sensor_min = {0.0, 0.0};
    man.sensor_max = {1.0, 1.0};

    SECTION("window counts at stride 1") {
        REQUIRE(make_windows({make_unit(1, 30)}, man, 30, 1).size() == 1);
        REQUIRE(make_windows({make_unit(1, 35)}, man, 30, 1).size() == 6);
        const Dataset empty = make_windows({make_unit(1, 20)}, man, 30, 1);
        REQUIRE(empty.size() == 0);
        REQUIRE(empty.manifest.skipped_units == 1);
    }
    SECTION("stride skips starts and labels ride the final cycle") {
        const Dataset ds = make_windows({make_unit(7, 12)}, man, 4, 3);
        REQUIRE(ds.size() == 3);  // starts 0, 3, 6
        REQUIRE(ds.windows[0].end_cycle == 4);
        REQUIRE(ds.windows[1].end_cycle == 7);
        REQUIRE(*ds.windows[0].life_fraction == Catch::Approx(4.0 / 12.0));
        REQUIRE(*ds.windows[2].rul_label == Catch::Approx(1.0 - 10.0 / 12.0));
        for (const auto& w : ds.windows) {
            REQUIRE(*w.rul_label >= 0.0);
            REQUIRE(*w.rul_label <= 1.0);
        }
    }
    SECTION("detach_labels flips the domain and preserves the values") {
        Dataset ds = make_windows({make_unit(1, 10)}, man, 4, 1);
        const double l0 = *ds.windows[0].rul_label;
        const TruthTable truth = detach_labels(ds);
        REQUIRE(ds.domain == DomainTag::target);
        REQUIRE_FALSE(ds.windows[0].rul_label.has_value());
        REQUIRE(truth.rul_label[0] == l0);
        REQUIRE(truth.rul_label.size() == ds.size());
        ds.validate();
    }
    SECTION("bad window parameters are rejected") {
        REQUIRE_THROWS_AS(make_windows({make_unit(1, 10)}, man, 0, 1), ContractViolation);
        REQUIRE_THROWS_AS(make_windows({make_unit(1, 10)}, man, 4, 0), ContractViolation);
    }
}

TEST_CASE("synthetic generator", "[data]") {
    SynthConfig cfg;
    cfg.units_per_domain = 4;
    cfg.sensors = 3;
    cfg.mean_life = 40;
    cfg.window_len = 10;
    cfg.stride = 2;
    cfg.seed = 99;

    SECTION("same config twice is bit-identical") {
        const SynthResult a = synth_generate(cfg);
        const SynthResult b = synth_generate(cfg);
        REQUIRE(a.source.size() == b.source.size());
        REQUIRE(a.target.size() == b.target.size());
        for (std::size_t i = 0; i < a.source.size(); ++i) {
            for (std::size_t k = 0; k < a.source.windows[i].values.size(); ++k)
                REQUIRE(a.source.windows[i].values[k] == b.source.windows[i].values[k]);
            REQUIRE(*a.source.windows[i].rul_label == *b.source.windows[i].rul_label);
        }
        for (std::size_t i = 0; i < a.target.size(); ++i)
            for (std::size_t k = 0; k < a.target.windows[i].values.size(); ++k)
                REQUIRE(a.target.windows[i].values[k] == b.target.windows[i].values[k]);
        REQUIRE(a.target_truth.rul_label == b.target_truth.rul_label);
    }
    SECTION("identity shift with zero noise reproduces source trends") {
        SynthConfig id = cfg;
        id.noise_scale = 0.0;
        id.shift = DomainShift{1.0, 0.0, 1.0};
        const SynthResult r = synth_generate(id);
        REQUIRE(r.source.size() == r.target.size());
        for (std::size_t i = 0; i < r.source.size(); ++i)
            for (std::size_t k = 0; k < r.source.windows[i].values.size(); ++k)
                REQUIRE(r.source.windows[i].values[k] == r.target.windows[i].values[k]);
    }
    SECTION("sensor scale 2 doubles raw target means") {
        SynthConfig sc = cfg;
        sc.noise_scale = 0.0;
        sc.shift = DomainShift{2.0, 0.0, 1.0};
        const auto src = synth_raw(sc, DomainTag::source);
        const auto tgt = synth_raw(sc, DomainTag::target);
        for (std::size_t u = 0; u < src.size(); ++u) {
            double ms = 0.0, mt = 0.0;
            for (std::size_t k = 0; k < src[u].values.size(); ++k) {
                ms += src[u].values[k];
                mt += tgt[u].values[k];
            }
            REQUIRE(mt == Catch::Approx(2.0 * ms).epsilon(1e-12));
        }
    }
    SECTION("labels live on the source side only and stay in range") {
        const SynthResult r = synth_generate(cfg);
        r.source.validate();
        r.target.validate();
        REQUIRE(r.source.domain == DomainTag::source);
        REQUIRE(r.target.domain == DomainTag::target);
        REQUIRE(r.target_truth.rul_label.size() == r.target.size());
        REQUIRE(r.source_truth.rul_label.size() == r.source.size());
        for (double lf : r.target_truth.life_fraction) {
            REQUIRE(lf >= 0.0);
            REQUIRE(lf <= 1.0);
        }
    }
    SECTION("time warp changes target dynamics") {
        SynthConfig tw = cfg;
        tw.noise_scale = 0.0;
        tw.shift = DomainShift{1.0, 0.0, 1.3};
        const SynthResult r = synth_generate(tw);
        bool differs = false;
        for (std::size_t i = 0; i < r.source.size() && !differs; ++i)
            for (std::size_t k = 0; k < r.source.windows[i].values.size(); ++k)
                if (r.source.windows[i].values[k] != r.target.windows[i].values[k]) {
                    differs = true;
                    break;
                }
        REQUIRE(differs);
    }
    SECTION("invalid configs are rejected") {
        SynthConfig bad = cfg;
        bad.sensors = 0;
        REQUIRE_THROWS_AS(synth_generate(bad), ContractViolation);
        bad = cfg;
        bad.noise_scale = -0.1;
        REQUIRE_THROWS_AS(synth_generate(bad), ContractViolation);
    }
}
