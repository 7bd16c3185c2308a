#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tacda/adam.hpp"
#include "tacda/error.hpp"
#include "tacda/nets.hpp"
#include "tacda/rng.hpp"
#include "tacda/serialize.hpp"
#include "tacda/synth.hpp"

using namespace tacda;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::string path;
    explicit TempDir(const std::string& p) : path(p) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

Checkpoint sample_checkpoint() {
    ArchDescriptor a;
    a.input_dim = 3;
    a.hidden = 4;
    a.layers = 1;
    a.bidirectional = true;
    a.window_len = 6;
    a.head_hidden = 5;
    a.head_layers = 2;
    Checkpoint ckpt;
    ckpt.model = make_model(a, 314);
    ckpt.config_hash = "cafebabe01234567";
    AdamState st;
    st.init_like(ckpt.model.decoder, 5e-3);
    // run one update so the moments are non-trivial
    std::vector<Tensor> grads;
    Rng rng(2718);
    for (std::size_t i = 0; i < ckpt.model.decoder.count(); ++i)
        grads.push_back(random_uniform(ckpt.model.decoder.param_at(i).shape(), -1.0, 1.0, rng));
    st.apply(ckpt.model.decoder, grads);
    ckpt.optim.emplace("decoder", std::move(st));
    AdamState st2;
    st2.init_like(ckpt.model.encoder_target, 5e-5);
    ckpt.optim.emplace("encoder_target", std::move(st2));
    return ckpt;
}

}  // namespace

TEST_CASE("tensor container round-trip and corruption handling", "[serialize]") {
    TempDir dir("tmp_serialize_tensor");
    const std::string path = dir.path + "/t.bin";
    Rng rng(1234);
    const Tensor t = random_uniform({3, 4}, -5.0, 5.0, rng);

    SECTION("round-trip preserves kind, shape, and bits") {
        write_tensor_file(path, kKindDataset, t);
        const auto [kind, back] = read_tensor_file(path);
        REQUIRE(kind == kKindDataset);
        REQUIRE(back.same_shape(t));
        for (std::size_t i = 0; i < t.size(); ++i) REQUIRE(back[i] == t[i]);
    }
    SECTION("bad magic is rejected") {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE" << std::string(64, '\0');
        out.close();
        REQUIRE_THROWS_AS(read_tensor_file(path), IoError);
    }
    SECTION("future version is rejected") {
        write_tensor_file(path, kKindDataset, t);
        std::string bytes = slurp(path);
        bytes[4] = 99;  // version field
        std::ofstream(path, std::ios::binary).write(bytes.data(), bytes.size());
        REQUIRE_THROWS_AS(read_tensor_file(path), IoError);
    }
    SECTION("truncated payload is rejected") {
        write_tensor_file(path, kKindDataset, t);
        std::string bytes = slurp(path);
        bytes.resize(bytes.size() - 16);
        std::ofstream(path, std::ios::binary).write(bytes.data(), bytes.size());
        REQUIRE_THROWS_AS(read_tensor_file(path), IoError);
    }
    SECTION("trailing bytes are rejected") {
        write_tensor_file(path, kKindDataset, t);
        std::ofstream app(path, std::ios::binary | std::ios::app);
        app << "x";
        app.close();
        REQUIRE_THROWS_AS(read_tensor_file(path), IoError);
    }
}

TEST_CASE("dataset directory round-trip", "[serialize]") {
    SynthConfig cfg;
    cfg.units_per_domain = 3;
    cfg.sensors = 2;
    cfg.mean_life = 30;
    cfg.window_len = 8;
    cfg.stride = 4;
    cfg.seed = 555;
    const SynthResult r = synth_generate(cfg);

    SECTION("labeled source survives save and load bit-exactly") {
        TempDir dir("tmp_serialize_src");
        dataset_save(dir.path, r.source);
        const Dataset back = dataset_load(dir.path);
        REQUIRE(back.domain == DomainTag::source);
        REQUIRE(back.size() == r.source.size());
        REQUIRE(back.sensor_names == r.source.sensor_names);
        REQUIRE(back.manifest.sensor_min == r.source.manifest.sensor_min);
        REQUIRE(back.manifest.sensor_max == r.source.manifest.sensor_max);
        REQUIRE(back.manifest.stride == r.source.manifest.stride);
        for (std::size_t i = 0; i < back.size(); ++i) {
            REQUIRE(*back.windows[i].rul_label == *r.source.windows[i].rul_label);
            REQUIRE(*back.windows[i].life_fraction == *r.source.windows[i].life_fraction);
            REQUIRE(back.windows[i].unit == r.source.windows[i].unit);
            for (std::size_t k = 0; k < back.windows[i].values.size(); ++k)
                REQUIRE(back.windows[i].values[k] == r.source.windows[i].values[k]);
        }
    }
    SECTION("unlabeled target carries its truth sidecar") {
        TempDir dir("tmp_serialize_tgt");
        dataset_save(dir.path, r.target, &r.target_truth);
        const Dataset back = dataset_load(dir.path);
        REQUIRE(back.domain == DomainTag::target);
        REQUIRE_FALSE(back.windows[0].rul_label.has_value());
        REQUIRE(has_truth(dir.path));
        const TruthTable truth = truth_load(dir.path);
        REQUIRE(truth.rul_label == r.target_truth.rul_label);
        REQUIRE(truth.life_fraction == r.target_truth.life_fraction);
    }
    SECTION("missing directory and malformed manifest are reported") {
        REQUIRE_THROWS_AS(dataset_load("tmp_no_such_dir"), IoError);
        TempDir dir("tmp_serialize_badman");
        dataset_save(dir.path, r.source);
        std::ofstream(dir.path + "/manifest.json") << "{ not json";
        REQUIRE_THROWS_AS(dataset_load(dir.path), ParseError);
    }
}

TEST_CASE("checkpoint round-trip", "[serialize]") {
    TempDir dir("tmp_serialize_ckpt");
    const std::string path = dir.path + "/model.ckpt";
    const Checkpoint ckpt = sample_checkpoint();

    SECTION("load reproduces every tensor, state, and the config hash") {
        checkpoint_save(path, ckpt);
        const Checkpoint back = checkpoint_load(path);
        REQUIRE(back.config_hash == ckpt.config_hash);
        REQUIRE(back.model.arch.hidden == ckpt.model.arch.hidden);
        REQUIRE(back.model.arch.bidirectional == ckpt.model.arch.bidirectional);
        for (const char* gname : {"encoder_source", "encoder_target", "decoder",
                                  "discriminator", "predictor"}) {
            const ParamGroup& a = ckpt.model.group(gname);
            const ParamGroup& b = back.model.group(gname);
            REQUIRE(b.shape_compatible(a));
            for (std::size_t i = 0; i < a.count(); ++i)
                for (std::size_t k = 0; k < a.param_at(i).size(); ++k)
                    REQUIRE(b.param_at(i)[k] == a.param_at(i)[k]);
        }
        REQUIRE(back.optim.size() == 2);
        const AdamState& sa = ckpt.optim.at("decoder");
        const AdamState& sb = back.optim.at("decoder");
        REQUIRE(sb.lr == sa.lr);
        REQUIRE(sb.step == sa.step);
        for (std::size_t i = 0; i < sa.m.size(); ++i)
            for (std::size_t k = 0; k < sa.m[i].size(); ++k) {
                REQUIRE(sb.m[i][k] == sa.m[i][k]);
                REQUIRE(sb.v[i][k] == sa.v[i][k]);
            }
    }
    SECTION("save, load, save is byte-identical") {
        checkpoint_save(path, ckpt);
        const Checkpoint back = checkpoint_load(path);
        const std::string path2 = dir.path + "/model2.ckpt";
        checkpoint_save(path2, back);
        REQUIRE(slurp(path) == slurp(path2));
    }
    SECTION("truncation fails cleanly") {
        checkpoint_save(path, ckpt);
        std::string bytes = slurp(path);
        bytes.resize(bytes.size() / 2);
        std::ofstream(path, std::ios::binary).write(bytes.data(), bytes.size());
        REQUIRE_THROWS_AS(checkpoint_load(path), IoError);
    }
    SECTION("a dataset tensor file is not a checkpoint") {
        Rng rng(1);
        write_tensor_file(path, kKindDataset, random_uniform({2, 2}, 0.0, 1.0, rng));
        REQUIRE_THROWS_AS(checkpoint_load(path), IoError);
    }
}
