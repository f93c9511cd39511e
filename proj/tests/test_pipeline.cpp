#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "embkit/config.hpp"
#include "embkit/pipeline.hpp"
#include "embkit/store.hpp"

using namespace embkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / (tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

config::KeyValueConfig micro_config() {
    auto cfg = config::KeyValueConfig::parse(R"(
[world]
n_products = 60
n_users = 120
n_styles = 2
image_dim = 8

[embedding]
dim = 8

[sgns]
epochs = 2

[bpr]
epochs = 2

[dae]
epochs = 3

[graph]
walks_per_node = 2
walk_length = 8
nmf_iters = 30

[eval]
sample_size = 40
max_sessions = 100
max_queries = 500
logreg_iters = 120
)");
    return cfg;
}

} // namespace

TEST_CASE("KeyValueConfig parses sections, comments, quotes") {
    auto cfg = config::KeyValueConfig::parse(R"(
# leading comment
seed = 9
[world]
n_products = 10   # trailing comment
name = "quoted value"
flag = true
ks = 1, 5, 10
)");
    CHECK(cfg.get_u64("", "seed", 0) == 9);
    CHECK(cfg.get_int("world", "n_products", 0) == 10);
    CHECK(cfg.get("world", "name", "") == "quoted value");
    CHECK(cfg.get_bool("world", "flag", false));
    CHECK(cfg.get_sizes("world", "ks", {}) == std::vector<std::size_t>{1, 5, 10});
    CHECK(cfg.get_int("world", "missing", 7) == 7);
    CHECK_THROWS_AS((void)cfg.get_int("world", "name", 0), ConfigError);
    CHECK_THROWS_AS((void)config::KeyValueConfig::parse("not a kv line"), ConfigError);
}

TEST_CASE("config digest is canonical and seed-sensitive") {
    auto a = config::KeyValueConfig::parse("[b]\nkey = 1\n[a]\nother = 2\n");
    auto b = config::KeyValueConfig::parse("[a]\nother = 2\n[b]\nkey = 1\n");
    CHECK(config::config_digest(a, 1) == config::config_digest(b, 1));
    CHECK(config::config_digest(a, 1) != config::config_digest(a, 2));
    auto c = config::KeyValueConfig::parse("[b]\nkey = 2\n[a]\nother = 2\n");
    CHECK(config::config_digest(a, 1) != config::config_digest(c, 1));
}

TEST_CASE("method names parse round-trip, including display spellings") {
    using pipeline::Method;
    for (Method m : pipeline::kAllMethods) {
        CHECK(pipeline::parse_method(pipeline::method_name(m)) == m);
        CHECK(pipeline::parse_method(pipeline::method_file_stem(m)) == m);
    }
    CHECK(pipeline::parse_method("BPR-MF") == Method::bpr_mf);
    CHECK(pipeline::parse_method("bpr_mf") == Method::bpr_mf);
    CHECK_THROWS_AS(pipeline::parse_method("nope"), ConfigError);
    CHECK_THROWS_AS(pipeline::parse_task("nope"), ConfigError);
}

TEST_CASE("event selection per method: lifetime methods ignore click-only products") {
    TempDir tmp("embkit_evsel");
    auto cfg = micro_config();
    auto files = pipeline::synth_to_dir(cfg, 3, tmp.str());

    // append one product that is ONLY ever clicked
    {
        std::ofstream cat(files.catalog, std::ios::app);
        cat << R"({"product_id":"zz_clickonly","brand":"brand_00","basecolor":"black",)"
            << R"("fabric":"cotton","priceband":"0-500","neck":"henley","pattern":"solid"})"
            << "\n";
        std::ofstream evs(files.events, std::ios::app);
        for (int i = 0; i < 40; ++i)
            evs << R"({"user_id":"u000","product_id":"zz_clickonly","event_type":"click",)"
                << R"("session_id":"u000_s0","ts":)" << 900000 + i << "}\n";
    }
    auto dataset = pipeline::load_dataset(files.catalog, files.events, cfg);
    EmbeddingTable images = load_table(files.images);

    auto p2v = pipeline::train_method(pipeline::Method::p2v, dataset, nullptr, cfg, 3);
    CHECK(!p2v.table.contains("zz_clickonly")); // bag+purchase only
    auto dwp2v = pipeline::train_method(pipeline::Method::dwp2v, dataset, nullptr, cfg, 3);
    CHECK(dwp2v.table.contains("zz_clickonly")); // all events feed the graph
    auto bpr = pipeline::train_method(pipeline::Method::bpr_mf, dataset, nullptr, cfg, 3);
    CHECK(bpr.table.contains("zz_clickonly")); // total interactions include clicks
}

TEST_CASE("unified methods require images and reuse cached base tables") {
    TempDir tmp("embkit_unif");
    auto cfg = micro_config();
    auto files = pipeline::synth_to_dir(cfg, 4, tmp.str());
    auto dataset = pipeline::load_dataset(files.catalog, files.events, cfg);
    EmbeddingTable images = load_table(files.images);

    CHECK_THROWS_AS(
        (void)pipeline::train_method(pipeline::Method::upsii2v, dataset, nullptr, cfg, 4),
        ConfigError);

    auto psi2v = pipeline::train_method(pipeline::Method::psi2v, dataset, nullptr, cfg, 4);
    std::map<pipeline::Method, const EmbeddingTable*> cache{
        {pipeline::Method::psi2v, &psi2v.table}};
    auto via_cache =
        pipeline::train_method(pipeline::Method::upsii2v, dataset, &images, cfg, 4, &cache);
    auto fresh = pipeline::train_method(pipeline::Method::upsii2v, dataset, &images, cfg, 4);
    REQUIRE(via_cache.table.size() == fresh.table.size());
    for (std::size_t i = 0; i < via_cache.table.size(); ++i) {
        auto a = via_cache.table.vec_at(i), b = fresh.table.vec_at(i);
        for (int k = 0; k < via_cache.table.dimension(); ++k) CHECK(a[k] == b[k]);
    }
    // unified table method metadata and SI handling
    CHECK(via_cache.table.metadata().method == "UPSII2V");
}

TEST_CASE("run_full twice produces byte-identical trees (micro world)") {
    TempDir d1("embkit_full_a"), d2("embkit_full_b");
    auto cfg = micro_config();
    auto w1 = pipeline::run_full(cfg, 17, d1.str());
    auto w2 = pipeline::run_full(cfg, 17, d2.str());
    REQUIRE(!w1.empty());
    REQUIRE(w1.size() == w2.size());
    for (std::size_t i = 0; i < w1.size(); ++i) {
        auto rel1 = fs::relative(w1[i], d1.path).string();
        auto rel2 = fs::relative(w2[i], d2.path).string();
        CHECK(rel1 == rel2);
        std::ifstream f1(w1[i], std::ios::binary), f2(w2[i], std::ios::binary);
        std::string b1(std::istreambuf_iterator<char>(f1), {});
        std::string b2(std::istreambuf_iterator<char>(f2), {});
        CHECK(b1 == b2);
    }
}

TEST_CASE("validation task wrappers expose the documented scalars") {
    TempDir tmp("embkit_vtask");
    auto cfg = micro_config();
    auto files = pipeline::synth_to_dir(cfg, 5, tmp.str());
    auto dataset = pipeline::load_dataset(files.catalog, files.events, cfg);
    auto psi2v = pipeline::train_method(pipeline::Method::psi2v, dataset, nullptr, cfg, 5);

    pipeline::EvalInputs in;
    in.dataset = &dataset;
    in.reference = &psi2v.table;
    auto vt = pipeline::make_validation_task(pipeline::Task::attributes, in, cfg, 5);
    double brand10 = vt.evaluate(psi2v.table);
    auto direct = pipeline::run_eval_task(pipeline::Task::attributes,
                                          [&] {
                                              auto i2 = in;
                                              i2.table = &psi2v.table;
                                              return i2;
                                          }(),
                                          cfg, 5);
    CHECK(brand10 == doctest::Approx(direct.value("brand", 10.0)));
    CHECK(vt.higher_is_better);
}
