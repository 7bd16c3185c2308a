#pragma once

// Binary tensor container (magic "TACD"), dataset directories
// (manifest.json + windows.bin [+ truth.json]), and bit-exact checkpoint
// round-trips.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacda/adam.hpp"
#include "tacda/data.hpp"
#include "tacda/error.hpp"
#include "tacda/nets.hpp"
#include "tacda/tensor.hpp"

namespace tacda {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kKindDataset = 1;
inline constexpr std::uint32_t kKindCheckpoint = 2;

namespace detail {

inline void write_bytes(std::ofstream& out, const void* p, std::size_t n,
                        const std::string& what) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw IoError("write failed: " + what);
}

inline void read_bytes(std::ifstream& in, void* p, std::size_t n, const std::string& what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
        throw IoError("truncated file while reading " + what);
}

template <typename T>
void write_pod(std::ofstream& out, T v, const std::string& what) {
    write_bytes(out, &v, sizeof(T), what);
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& what) {
    T v{};
    read_bytes(in, &v, sizeof(T), what);
    return v;
}

inline void write_header(std::ofstream& out, std::uint32_t kind) {
    write_bytes(out, "TACD", 4, "magic");
    write_pod<std::uint32_t>(out, kFormatVersion, "version");
    write_pod<std::uint32_t>(out, kind, "kind");
}

inline std::uint32_t read_header(std::ifstream& in, const std::string& path) {
    char magic[4];
    read_bytes(in, magic, 4, "magic of " + path);
    if (std::memcmp(magic, "TACD", 4) != 0) throw IoError("bad magic in " + path);
    const auto version = read_pod<std::uint32_t>(in, "version of " + path);
    if (version != kFormatVersion)
        throw IoError("unsupported format version " + std::to_string(version) + " in " + path);
    return read_pod<std::uint32_t>(in, "kind of " + path);
}

}  // namespace detail

inline void write_tensor_file(const std::string& path, std::uint32_t kind, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    detail::write_header(out, kind);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()), "rank");
    for (std::size_t d : t.shape()) detail::write_pod<std::uint64_t>(out, d, "dims");
    detail::write_bytes(out, t.data(), t.size() * sizeof(double), "payload");
}

inline std::pair<std::uint32_t, Tensor> read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    const std::uint32_t kind = detail::read_header(in, path);
    const auto rank = detail::read_pod<std::uint32_t>(in, "rank of " + path);
    require(rank <= 4, "read_tensor_file: implausible rank in " + path);
    std::vector<std::size_t> shape;
    for (std::uint32_t d = 0; d < rank; ++d)
        shape.push_back(static_cast<std::size_t>(
            detail::read_pod<std::uint64_t>(in, "dims of " + path)));
    Tensor t(shape);
    detail::read_bytes(in, t.data(), t.size() * sizeof(double), "payload of " + path);
    char extra;
    if (in.read(&extra, 1).gcount() != 0) throw IoError("trailing bytes in " + path);
    return {kind, std::move(t)};
}

// ---- dataset directory ----

namespace detail {

inline nlohmann::json truth_to_json(const TruthTable& t) {
    return nlohmann::json{{"rul_label", t.rul_label}, {"life_fraction", t.life_fraction}};
}

inline TruthTable truth_from_json(const nlohmann::json& j) {
    TruthTable t;
    t.rul_label = j.at("rul_label").get<std::vector<double>>();
    t.life_fraction = j.at("life_fraction").get<std::vector<double>>();
    return t;
}

}  // namespace detail

inline void dataset_save(const std::string& dir, const Dataset& ds,
                         const TruthTable* truth = nullptr) {
    ds.validate();
    require(!ds.windows.empty(), "dataset_save: empty dataset");
    std::filesystem::create_directories(dir);
    const std::size_t N = ds.size(), M = ds.input_dim(), L = ds.window_len();

    Tensor all({N, M, L});
    for (std::size_t i = 0; i < N; ++i) {
        const Tensor& w = ds.windows[i].values;
        for (std::size_t j = 0; j < M * L; ++j) all[i * M * L + j] = w[j];
    }
    write_tensor_file(dir + "/windows.bin", kKindDataset, all);

    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["domain"] = domain_name(ds.domain);
    j["n_windows"] = N;
    j["n_sensors"] = M;
    j["window_len"] = L;
    j["sensor_names"] = ds.sensor_names;
    j["sensor_subset"] = ds.manifest.sensor_subset;
    j["sensor_min"] = ds.manifest.sensor_min;
    j["sensor_max"] = ds.manifest.sensor_max;
    j["constant_sensors"] = ds.manifest.constant_sensors;
    j["rul_cap"] = ds.manifest.rul_cap;
    j["stride"] = ds.manifest.stride;
    j["skipped_units"] = ds.manifest.skipped_units;
    j["seed"] = ds.manifest.seed;
    std::vector<long> units;
    std::vector<std::size_t> end_cycles;
    for (const SensorWindow& w : ds.windows) {
        units.push_back(w.unit);
        end_cycles.push_back(w.end_cycle);
    }
    j["unit"] = units;
    j["end_cycle"] = end_cycles;
    if (ds.domain == DomainTag::source) {
        std::vector<double> rul, lf;
        for (const SensorWindow& w : ds.windows) {
            rul.push_back(*w.rul_label);
            lf.push_back(*w.life_fraction);
        }
        j["rul_label"] = rul;
        j["life_fraction"] = lf;
    }
    std::ofstream mf(dir + "/manifest.json");
    if (!mf) throw IoError("cannot write " + dir + "/manifest.json");
    mf << j.dump(2) << "\n";
    if (!mf) throw IoError("write failed: " + dir + "/manifest.json");

    if (truth) {
        std::ofstream tf(dir + "/truth.json");
        if (!tf) throw IoError("cannot write " + dir + "/truth.json");
        tf << detail::truth_to_json(*truth).dump(2) << "\n";
    }
}

inline Dataset dataset_load(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw IoError("cannot open " + dir + "/manifest.json");
    nlohmann::json j;
    try {
        mf >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid manifest in " + dir + ": " + e.what());
    }
    auto [kind, all] = read_tensor_file(dir + "/windows.bin");
    if (kind != kKindDataset) throw IoError("windows.bin has wrong kind in " + dir);
    require(all.rank() == 3, "dataset_load: windows tensor must be rank 3");

    Dataset ds;
    const std::string dom = j.at("domain").get<std::string>();
    require(dom == "source" || dom == "target", "dataset_load: unknown domain tag");
    ds.domain = dom == "source" ? DomainTag::source : DomainTag::target;
    const std::size_t N = j.at("n_windows").get<std::size_t>();
    const std::size_t M = j.at("n_sensors").get<std::size_t>();
    const std::size_t L = j.at("window_len").get<std::size_t>();
    require(all.shape()[0] == N && all.shape()[1] == M && all.shape()[2] == L,
            "dataset_load: manifest and windows.bin disagree on shape");
    ds.sensor_names = j.at("sensor_names").get<std::vector<std::string>>();
    ds.manifest.sensor_subset = j.at("sensor_subset").get<std::vector<int>>();
    ds.manifest.sensor_min = j.at("sensor_min").get<std::vector<double>>();
    ds.manifest.sensor_max = j.at("sensor_max").get<std::vector<double>>();
    ds.manifest.constant_sensors = j.at("constant_sensors").get<std::vector<int>>();
    ds.manifest.rul_cap = j.at("rul_cap").get<double>();
    ds.manifest.window_len = L;
    ds.manifest.stride = j.at("stride").get<std::size_t>();
    ds.manifest.skipped_units = j.at("skipped_units").get<std::size_t>();
    ds.manifest.seed = j.at("seed").get<std::uint64_t>();
    const auto units = j.at("unit").get<std::vector<long>>();
    const auto ends = j.at("end_cycle").get<std::vector<std::size_t>>();
    require(units.size() == N && ends.size() == N, "dataset_load: provenance arrays disagree");
    std::vector<double> rul, lf;
    if (ds.domain == DomainTag::source) {
        rul = j.at("rul_label").get<std::vector<double>>();
        lf = j.at("life_fraction").get<std::vector<double>>();
        require(rul.size() == N && lf.size() == N, "dataset_load: label arrays disagree");
    }
    ds.windows.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        SensorWindow& w = ds.windows[i];
        w.values = Tensor({M, L});
        for (std::size_t k = 0; k < M * L; ++k) w.values[k] = all[i * M * L + k];
        w.unit = units[i];
        w.end_cycle = ends[i];
        if (ds.domain == DomainTag::source) {
            w.rul_label = rul[i];
            w.life_fraction = lf[i];
        }
    }
    ds.validate();
    return ds;
}

inline bool has_truth(const std::string& dir) {
    return std::filesystem::exists(dir + "/truth.json");
}

inline TruthTable truth_load(const std::string& dir) {
    std::ifstream tf(dir + "/truth.json");
    if (!tf) throw IoError("cannot open " + dir + "/truth.json");
    nlohmann::json j;
    try {
        tf >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid truth.json in " + dir + ": " + e.what());
    }
    return detail::truth_from_json(j);
}

// ---- checkpoints ----

struct Checkpoint {
    ModelBundle model;
    std::map<std::string, AdamState> optim;  // keyed by parameter-group name
    std::string config_hash;
};

namespace detail {

inline const std::vector<std::string>& group_order() {
    static const std::vector<std::string> order{"encoder_source", "encoder_target", "decoder",
                                                "discriminator", "predictor"};
    return order;
}

}  // namespace detail

inline void checkpoint_save(const std::string& path, const Checkpoint& ckpt) {
    nlohmann::json meta;
    const ArchDescriptor& a = ckpt.model.arch;
    meta["arch"] = {{"input_dim", a.input_dim},     {"hidden", a.hidden},
                    {"layers", a.layers},           {"bidirectional", a.bidirectional},
                    {"window_len", a.window_len},   {"head_hidden", a.head_hidden},
                    {"head_layers", a.head_layers}};
    meta["config_hash"] = ckpt.config_hash;
    nlohmann::json groups = nlohmann::json::array();
    for (const std::string& gname : detail::group_order()) {
        const ParamGroup& g = ckpt.model.group(gname);
        nlohmann::json params = nlohmann::json::array();
        for (std::size_t i = 0; i < g.count(); ++i)
            params.push_back({{"name", g.names()[i]}, {"shape", g.param_at(i).shape()}});
        groups.push_back({{"name", gname}, {"params", params}});
    }
    meta["groups"] = groups;
    nlohmann::json optim = nlohmann::json::array();
    for (const auto& [gname, st] : ckpt.optim) {
        require(st.m.size() == ckpt.model.group(gname).count(),
                "checkpoint_save: optimizer state misaligned for " + gname);
        optim.push_back({{"group", gname},
                         {"lr", st.lr},
                         {"beta1", st.beta1},
                         {"beta2", st.beta2},
                         {"eps", st.eps},
                         {"step", st.step}});
    }
    meta["optimizer"] = optim;
    const std::string meta_str = meta.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    detail::write_header(out, kKindCheckpoint);
    detail::write_pod<std::uint64_t>(out, meta_str.size(), "meta length");
    detail::write_bytes(out, meta_str.data(), meta_str.size(), "meta");
    for (const std::string& gname : detail::group_order()) {
        const ParamGroup& g = ckpt.model.group(gname);
        for (std::size_t i = 0; i < g.count(); ++i)
            detail::write_bytes(out, g.param_at(i).data(), g.param_at(i).size() * sizeof(double),
                                "params " + gname);
    }
    for (const auto& [gname, st] : ckpt.optim) {
        for (const Tensor& t : st.m)
            detail::write_bytes(out, t.data(), t.size() * sizeof(double), "adam m " + gname);
        for (const Tensor& t : st.v)
            detail::write_bytes(out, t.data(), t.size() * sizeof(double), "adam v " + gname);
    }
}

inline Checkpoint checkpoint_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    if (detail::read_header(in, path) != kKindCheckpoint)
        throw IoError(path + " is not a checkpoint");
    const auto meta_len = detail::read_pod<std::uint64_t>(in, "meta length of " + path);
    require(meta_len < (1u << 26), "checkpoint_load: implausible meta length");
    std::string meta_str(meta_len, '\0');
    detail::read_bytes(in, meta_str.data(), meta_len, "meta of " + path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_str);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("corrupt checkpoint meta in " + path + ": " + e.what());
    }

    Checkpoint ckpt;
    const nlohmann::json& ja = meta.at("arch");
    ckpt.model.arch.input_dim = ja.at("input_dim").get<std::size_t>();
    ckpt.model.arch.hidden = ja.at("hidden").get<std::size_t>();
    ckpt.model.arch.layers = ja.at("layers").get<std::size_t>();
    ckpt.model.arch.bidirectional = ja.at("bidirectional").get<bool>();
    ckpt.model.arch.window_len = ja.at("window_len").get<std::size_t>();
    ckpt.model.arch.head_hidden = ja.at("head_hidden").get<std::size_t>();
    ckpt.model.arch.head_layers = ja.at("head_layers").get<std::size_t>();
    ckpt.config_hash = meta.at("config_hash").get<std::string>();

    for (const nlohmann::json& jg : meta.at("groups")) {
        const std::string gname = jg.at("name").get<std::string>();
        ParamGroup& g = ckpt.model.group(gname);
        for (const nlohmann::json& jp : jg.at("params")) {
            const auto shape = jp.at("shape").get<std::vector<std::size_t>>();
            g.add(jp.at("name").get<std::string>(), Tensor(shape));
        }
    }
    for (const std::string& gname : detail::group_order()) {
        ParamGroup& g = ckpt.model.group(gname);
        for (std::size_t i = 0; i < g.count(); ++i)
            detail::read_bytes(in, g.param_at(i).data(), g.param_at(i).size() * sizeof(double),
                               "params " + gname + " of " + path);
    }
    for (const nlohmann::json& jo : meta.at("optimizer")) {
        const std::string gname = jo.at("group").get<std::string>();
        ParamGroup& g = ckpt.model.group(gname);
        AdamState st;
        st.lr = jo.at("lr").get<double>();
        st.beta1 = jo.at("beta1").get<double>();
        st.beta2 = jo.at("beta2").get<double>();
        st.eps = jo.at("eps").get<double>();
        st.step = jo.at("step").get<std::size_t>();
        for (std::size_t i = 0; i < g.count(); ++i) {
            Tensor t(g.param_at(i).shape());
            detail::read_bytes(in, t.data(), t.size() * sizeof(double),
                               "adam m " + gname + " of " + path);
            st.m.push_back(std::move(t));
        }
        for (std::size_t i = 0; i < g.count(); ++i) {
            Tensor t(g.param_at(i).shape());
            detail::read_bytes(in, t.data(), t.size() * sizeof(double),
                               "adam v " + gname + " of " + path);
            st.v.push_back(std::move(t));
        }
        ckpt.optim.emplace(gname, std::move(st));
    }
    char extra;
    if (in.read(&extra, 1).gcount() != 0) throw IoError("trailing bytes in " + path);
    return ckpt;
}

}  // namespace tacda
