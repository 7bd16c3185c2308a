#pragma once

// Plain key=value run configuration shared by the command-line tools.
// Grammar: one `key = value` pair per line, `#` starts a comment, and a
// `[section]` header prefixes every key below it (so `gamma = 0.1` under
// `[adapt]` means `adapt.gamma`). Fully qualified keys work without any
// section header. Unknown and duplicate keys are rejected so typos fail
// loudly instead of silently keeping a default.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacda/data.hpp"
#include "tacda/error.hpp"
#include "tacda/pipeline.hpp"
#include "tacda/stages.hpp"
#include "tacda/synth.hpp"

namespace tacda {

// Ingestion-side settings: where datasets live and how raw series are cut
// into windows. Directories may stay empty when given on the command line.
struct DataConfig {
    std::string source_dir;
    std::string target_dir;
    std::vector<int> sensors = default_sensor_subset();
    double rul_cap = 125.0;
    std::size_t window_len = 30;
    std::size_t stride = 1;

    void validate() const {
        require(!sensors.empty(), "DataConfig: sensor subset must not be empty");
        require(rul_cap > 0.0, "DataConfig: rul_cap must be positive");
        require(window_len >= 1 && stride >= 1, "DataConfig: window parameters must be >= 1");
    }
};

struct BenchmarkConfig {
    std::size_t seeds = 5;
    std::uint64_t first_seed = 1;

    void validate() const { require(seeds >= 1, "BenchmarkConfig: seeds must be at least 1"); }
};

struct RunConfig {
    AdaptConfig adapt;
    SynthConfig synth;
    DataConfig data;
    BenchmarkConfig benchmark;

    void validate() const {
        adapt.validate();
        synth.validate();
        data.validate();
        benchmark.validate();
    }
};

namespace detail {

inline std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

inline double config_double(const std::string& ctx, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ParseError("config: " + ctx + " expects a number, got '" + v + "'");
    }
}

inline std::uint64_t config_u64(const std::string& ctx, const std::string& v) {
    try {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
        std::size_t pos = 0;
        const unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return static_cast<std::uint64_t>(n);
    } catch (const std::exception&) {
        throw ParseError("config: " + ctx + " expects a non-negative integer, got '" + v + "'");
    }
}

inline std::size_t config_size(const std::string& ctx, const std::string& v) {
    return static_cast<std::size_t>(config_u64(ctx, v));
}

inline bool config_bool(const std::string& ctx, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("config: " + ctx + " expects true/false, got '" + v + "'");
}

inline std::vector<int> config_int_list(const std::string& ctx, const std::string& v) {
    std::vector<int> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ParseError("config: " + ctx + " expects comma-separated integers, got '" + v +
                             "'");
        }
    }
    if (out.empty()) throw ParseError("config: " + ctx + " expects a non-empty integer list");
    return out;
}

inline AdaptConfig::Adversarial config_adversarial(const std::string& ctx, const std::string& v) {
    if (v == "label-flip") return AdaptConfig::Adversarial::label_flip;
    if (v == "literal-minimax") return AdaptConfig::Adversarial::literal_minimax;
    throw ParseError("config: " + ctx + " expects label-flip or literal-minimax, got '" + v + "'");
}

inline std::optional<Stage> config_stage_opt(const std::string& ctx, const std::string& v) {
    if (v == "none") return std::nullopt;
    try {
        return stage_from_name(v);
    } catch (const ContractViolation&) {
        throw ParseError("config: " + ctx + " expects none/sluggish/accelerated/terminal, got '" +
                         v + "'");
    }
}

inline void apply_config_key(RunConfig& rc, const std::string& key, const std::string& value,
                             const std::string& ctx) {
    AdaptConfig& a = rc.adapt;
    SynthConfig& s = rc.synth;
    DataConfig& d = rc.data;
    BenchmarkConfig& b = rc.benchmark;
    if (key == "adapt.gamma") a.gamma = config_double(ctx, value);
    else if (key == "adapt.lambda") a.lambda = config_double(ctx, value);
    else if (key == "adapt.lr_encoder") a.lr_encoder = config_double(ctx, value);
    else if (key == "adapt.lr_discriminator") a.lr_discriminator = config_double(ctx, value);
    else if (key == "adapt.lr_decoder") a.lr_decoder = config_double(ctx, value);
    else if (key == "adapt.lr_pretrain") a.lr_pretrain = config_double(ctx, value);
    else if (key == "adapt.batch_size") a.batch_size = config_size(ctx, value);
    else if (key == "adapt.pretrain_epochs") a.pretrain_epochs = config_size(ctx, value);
    else if (key == "adapt.round1_epochs") a.round1_epochs = config_size(ctx, value);
    else if (key == "adapt.round2_epochs_per_stage")
        a.round2_epochs_per_stage = config_size(ctx, value);
    else if (key == "adapt.seed") a.seed = config_u64(ctx, value);
    else if (key == "adapt.adversarial_variant")
        a.adversarial_variant = config_adversarial(ctx, value);
    else if (key == "adapt.sluggish_boundary") a.sluggish_boundary = config_double(ctx, value);
    else if (key == "adapt.terminal_boundary") a.terminal_boundary = config_double(ctx, value);
    else if (key == "adapt.stage_clusters") a.stage_clusters = config_size(ctx, value);
    else if (key == "adapt.kmeans_max_iter") a.kmeans_max_iter = config_size(ctx, value);
    else if (key == "adapt.without_decoder") a.without_decoder = config_bool(ctx, value);
    else if (key == "adapt.without_round2") a.without_round2 = config_bool(ctx, value);
    else if (key == "adapt.reinit_discriminator_per_stage")
        a.reinit_discriminator_per_stage = config_bool(ctx, value);
    else if (key == "adapt.strict_stage_reset") a.strict_stage_reset = config_bool(ctx, value);
    else if (key == "adapt.exclude_target_stage")
        a.exclude_target_stage = config_stage_opt(ctx, value);
    else if (key == "arch.hidden") a.arch.hidden = config_size(ctx, value);
    else if (key == "arch.layers") a.arch.layers = config_size(ctx, value);
    else if (key == "arch.bidirectional") a.arch.bidirectional = config_bool(ctx, value);
    else if (key == "arch.head_hidden") a.arch.head_hidden = config_size(ctx, value);
    else if (key == "arch.head_layers") a.arch.head_layers = config_size(ctx, value);
    else if (key == "synth.units_per_domain") s.units_per_domain = config_size(ctx, value);
    else if (key == "synth.sensors") s.sensors = config_size(ctx, value);
    else if (key == "synth.mean_life") s.mean_life = config_size(ctx, value);
    else if (key == "synth.noise_scale") s.noise_scale = config_double(ctx, value);
    else if (key == "synth.sensor_scale") s.shift.sensor_scale = config_double(ctx, value);
    else if (key == "synth.sensor_offset") s.shift.sensor_offset = config_double(ctx, value);
    else if (key == "synth.time_warp") s.shift.time_warp = config_double(ctx, value);
    else if (key == "synth.seed") s.seed = config_u64(ctx, value);
    else if (key == "synth.window_len") s.window_len = config_size(ctx, value);
    else if (key == "synth.stride") s.stride = config_size(ctx, value);
    else if (key == "synth.rul_cap") s.rul_cap = config_double(ctx, value);
    else if (key == "data.source_dir") d.source_dir = value;
    else if (key == "data.target_dir") d.target_dir = value;
    else if (key == "data.sensors") d.sensors = config_int_list(ctx, value);
    else if (key == "data.rul_cap") d.rul_cap = config_double(ctx, value);
    else if (key == "data.window_len") d.window_len = config_size(ctx, value);
    else if (key == "data.stride") d.stride = config_size(ctx, value);
    else if (key == "benchmark.seeds") b.seeds = config_size(ctx, value);
    else if (key == "benchmark.first_seed") b.first_seed = config_u64(ctx, value);
    else throw ParseError("config: unknown key '" + key + "' (" + ctx + ")");
}

}  // namespace detail

// Parses on top of `base`, so callers can layer a file over their own
// defaults. The encoder input width and window length are not config keys;
// they always come from the dataset at hand.
inline RunConfig parse_run_config(const std::string& text, RunConfig base = RunConfig{}) {
    std::istringstream in(text);
    std::string line, prefix;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string ctx = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("config: " + ctx + ": malformed section header '" + line + "'");
            prefix = detail::trim(line.substr(1, line.size() - 2));
            if (prefix.empty()) throw ParseError("config: " + ctx + ": empty section name");
            prefix += '.';
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: " + ctx + ": expected key = value, got '" + line + "'");
        const std::string key = prefix + detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || key == prefix)
            throw ParseError("config: " + ctx + ": missing key before '='");
        if (!seen.insert(key).second)
            throw ParseError("config: " + ctx + ": duplicate key '" + key + "'");
        detail::apply_config_key(base, key, value, "key '" + key + "' (" + ctx + ")");
    }
    return base;
}

inline RunConfig load_run_config(const std::string& path, RunConfig base = RunConfig{}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), std::move(base));
}

// Fully resolved settings, defaults applied. Embedded verbatim in every
// artifact the CLI writes so any output can be regenerated from its own
// metadata.
inline nlohmann::json run_config_json(const RunConfig& rc) {
    const AdaptConfig& a = rc.adapt;
    const SynthConfig& s = rc.synth;
    const DataConfig& d = rc.data;
    nlohmann::json adapt{
        {"gamma", a.gamma},
        {"lambda", a.lambda},
        {"lr_encoder", a.lr_encoder},
        {"lr_discriminator", a.lr_discriminator},
        {"lr_decoder", a.lr_decoder},
        {"lr_pretrain", a.lr_pretrain},
        {"batch_size", a.batch_size},
        {"pretrain_epochs", a.pretrain_epochs},
        {"round1_epochs", a.round1_epochs},
        {"round2_epochs_per_stage", a.round2_epochs_per_stage},
        {"seed", a.seed},
        {"adversarial_variant", adversarial_name(a.adversarial_variant)},
        {"sluggish_boundary", a.sluggish_boundary},
        {"terminal_boundary", a.terminal_boundary},
        {"stage_clusters", a.stage_clusters},
        {"kmeans_max_iter", a.kmeans_max_iter},
        {"without_decoder", a.without_decoder},
        {"without_round2", a.without_round2},
        {"reinit_discriminator_per_stage", a.reinit_discriminator_per_stage},
        {"strict_stage_reset", a.strict_stage_reset},
        {"exclude_target_stage",
         a.exclude_target_stage ? stage_name(*a.exclude_target_stage) : "none"},
    };
    nlohmann::json arch{
        {"input_dim", a.arch.input_dim},   {"hidden", a.arch.hidden},
        {"layers", a.arch.layers},         {"bidirectional", a.arch.bidirectional},
        {"window_len", a.arch.window_len}, {"head_hidden", a.arch.head_hidden},
        {"head_layers", a.arch.head_layers},
    };
    nlohmann::json synth{
        {"units_per_domain", s.units_per_domain},
        {"sensors", s.sensors},
        {"mean_life", s.mean_life},
        {"noise_scale", s.noise_scale},
        {"sensor_scale", s.shift.sensor_scale},
        {"sensor_offset", s.shift.sensor_offset},
        {"time_warp", s.shift.time_warp},
        {"seed", s.seed},
        {"window_len", s.window_len},
        {"stride", s.stride},
        {"rul_cap", s.rul_cap},
    };
    nlohmann::json data{
        {"source_dir", d.source_dir}, {"target_dir", d.target_dir},
        {"sensors", d.sensors},       {"rul_cap", d.rul_cap},
        {"window_len", d.window_len}, {"stride", d.stride},
    };
    nlohmann::json benchmark{
        {"seeds", rc.benchmark.seeds},
        {"first_seed", rc.benchmark.first_seed},
    };
    return nlohmann::json{{"adapt", adapt},
                          {"arch", arch},
                          {"synth", synth},
                          {"data", data},
                          {"benchmark", benchmark}};
}

}  // namespace tacda
