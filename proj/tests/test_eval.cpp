#include <doctest.h>

#include <cmath>
#include <fstream>

#include "embkit/eval.hpp"
#include "embkit/ingest.hpp"
#include "embkit/rng.hpp"

using namespace embkit;
using namespace embkit::eval;

namespace {

Catalog brand_catalog(int n, int brands) {
    std::vector<ProductRecord> records;
    for (int i = 0; i < n; ++i) {
        ProductRecord rec{"p" + std::to_string(i), {}};
        rec.set_attr(SiKey::brand, "b" + std::to_string(i % brands));
        rec.set_attr(SiKey::basecolor, "black"); // everyone shares the color
        rec.set_attr(SiKey::priceband, "0-500");
        records.push_back(rec);
    }
    return Catalog(records);
}

/// vectors = one-hot of brand: same-brand products are identical points
EmbeddingTable brand_one_hot_table(const Catalog& catalog, int brands,
                                   const std::string& method = "T") {
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    Rng rng(5);
    for (const auto& rec : catalog.records()) {
        int b = std::stoi(rec.attr(SiKey::brand)->substr(1));
        EmbeddingVector v(brands, 0.0f);
        v[b] = 1.0f;
        // tiny jitter so ties don't dominate
        for (auto& x : v) x += static_cast<float>(0.01 * rng.uniform());
        entries.emplace_back(rec.id, v);
    }
    return EmbeddingTable(brands, std::move(entries), {method, ""});
}

Event ev(const std::string& u, const std::string& p, EventType t, const std::string& s,
         std::int64_t ts) {
    return Event{u, p, t, s, ts, {}};
}

} // namespace

TEST_CASE("attribute precision: brand-aligned vectors score 1.0 on brand") {
    const int brands = 4;
    Catalog catalog = brand_catalog(40, brands);
    auto table = brand_one_hot_table(catalog, brands);
    AttributeTaskConfig cfg;
    cfg.sample_size = 40;
    cfg.ks = {1, 5};
    auto report = attribute_precision_at_k(table, catalog, cfg);
    // 10 products per brand: at k=5 all neighbors share the brand
    CHECK(report.value("brand", 5.0) == doctest::Approx(1.0));
    // tautology attribute: every product shares basecolor -> exactly 1.0
    CHECK(report.value("basecolor", 5.0) == doctest::Approx(1.0));
}

TEST_CASE("attribute precision: unrelated attribute sits near the base rate") {
    const int brands = 4;
    std::vector<ProductRecord> records;
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        ProductRecord rec{"p" + std::to_string(i), {}};
        rec.set_attr(SiKey::brand, "b" + std::to_string(i % brands));
        // fabric is independent of brand, 4 values uniformly
        rec.set_attr(SiKey::fabric, "f" + std::to_string(rng.index(4)));
        records.push_back(rec);
    }
    Catalog catalog(records);
    auto table = brand_one_hot_table(catalog, brands);
    AttributeTaskConfig cfg;
    cfg.sample_size = 200;
    cfg.ks = {10};
    cfg.attributes = {SiKey::brand, SiKey::fabric};
    auto report = attribute_precision_at_k(table, catalog, cfg);
    CHECK(report.value("brand", 10.0) == doctest::Approx(1.0));
    CHECK(report.value("fabric", 10.0) == doctest::Approx(0.25).epsilon(0.4));
}

TEST_CASE("attribute precision: queries missing the attribute are excluded and counted") {
    std::vector<ProductRecord> records;
    for (int i = 0; i < 10; ++i) {
        ProductRecord rec{"p" + std::to_string(i), {}};
        if (i > 0) rec.set_attr(SiKey::brand, "b0");
        records.push_back(rec);
    }
    Catalog catalog(records);
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    Rng rng(3);
    for (const auto& rec : catalog.records()) {
        EmbeddingVector v(3);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        entries.emplace_back(rec.id, v);
    }
    EmbeddingTable table(3, std::move(entries), {"T", ""});
    AttributeTaskConfig cfg;
    cfg.sample_size = 10;
    cfg.ks = {3};
    cfg.attributes = {SiKey::brand};
    auto report = attribute_precision_at_k(table, catalog, cfg);
    bool found = false;
    for (const auto& [name, v] : report.counters)
        if (name == "queries_missing_brand") {
            CHECK(v == doctest::Approx(1.0));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("clicked-purchased: identical clicked/purchased vector ranks 1") {
    Catalog catalog = brand_catalog(12, 3);
    auto table = brand_one_hot_table(catalog, 3);
    // one user, three purchases for eligibility, last session clicks p0 then buys p0
    std::vector<Event> events = {
        ev("u1", "p1", EventType::purchase, "s1", 1),
        ev("u1", "p2", EventType::purchase, "s2", 2),
        ev("u1", "p0", EventType::click, "s3", 3),
        ev("u1", "p0", EventType::purchase, "s3", 4),
    };
    auto sessions = ingest::build_sessions(events);
    ClickedPurchasedConfig cfg;
    cfg.coherence_threshold = -1.0; // keep everything
    auto report = clicked_purchased_rank(table, sessions, table, cfg);
    CHECK(report.value("", 1.0) == doctest::Approx(1.0));
}

TEST_CASE("clicked-purchased: pruned session set is table-independent") {
    Rng rng(21);
    Catalog catalog = brand_catalog(30, 3);
    auto reference = brand_one_hot_table(catalog, 3, "REF");
    // random vectors under test; pruning must come from the reference only
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    for (const auto& rec : catalog.records()) {
        EmbeddingVector v(3);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        entries.emplace_back(rec.id, v);
    }
    EmbeddingTable random_table(3, std::move(entries), {"RAND", ""});

    std::vector<Event> events;
    int t = 0;
    for (int u = 0; u < 8; ++u) {
        std::string user = "u" + std::to_string(u);
        for (int s = 0; s < 3; ++s) {
            std::string session = user + "_s" + std::to_string(s);
            for (int c = 0; c < 4; ++c)
                events.push_back(ev(user, "p" + std::to_string(rng.index(30)), EventType::click,
                                    session, ++t));
            events.push_back(
                ev(user, "p" + std::to_string(rng.index(30)), EventType::purchase, session, ++t));
        }
    }
    auto sessions = ingest::build_sessions(events);
    ClickedPurchasedConfig cfg;
    cfg.coherence_threshold = 0.6;
    auto r1 = clicked_purchased_rank(reference, sessions, reference, cfg);
    auto r2 = clicked_purchased_rank(random_table, sessions, reference, cfg);
    auto counter = [](const EvalReport& r, const std::string& name) {
        for (const auto& [n, v] : r.counters)
            if (n == name) return v;
        return -1.0;
    };
    CHECK(counter(r1, "sessions_kept") == counter(r2, "sessions_kept"));
    CHECK(counter(r1, "sessions_pruned_incoherent") == counter(r2, "sessions_pruned_incoherent"));
}

TEST_CASE("clicked-purchased: random vectors give median ranks near |P|/2") {
    const int n = 60;
    std::vector<ProductRecord> records;
    for (int i = 0; i < n; ++i) records.push_back(ProductRecord{"p" + std::to_string(i), {}});
    Catalog catalog(records);
    Rng rng(33);
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    for (const auto& rec : catalog.records()) {
        EmbeddingVector v(16);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        entries.emplace_back(rec.id, v);
    }
    EmbeddingTable table(16, std::move(entries), {"RAND", ""});

    std::vector<Event> events;
    int t = 0;
    for (int u = 0; u < 40; ++u) {
        std::string user = "u" + std::to_string(u);
        // eligibility purchases
        for (int k = 0; k < 3; ++k)
            events.push_back(ev(user, "p" + std::to_string(rng.index(n)), EventType::purchase,
                                user + "_warm", ++t));
        std::string session = user + "_s";
        for (int c = 0; c < 6; ++c)
            events.push_back(
                ev(user, "p" + std::to_string(rng.index(n)), EventType::click, session, ++t));
        events.push_back(
            ev(user, "p" + std::to_string(rng.index(n)), EventType::purchase, session, ++t));
    }
    auto sessions = ingest::build_sessions(events);
    ClickedPurchasedConfig cfg;
    cfg.coherence_threshold = -1.0; // no pruning: the null needs all sessions
    auto report = clicked_purchased_rank(table, sessions, table, cfg);
    double m = report.value("", 1.0);
    CHECK(m > n * 0.25);
    CHECK(m < n * 0.75);
}

TEST_CASE("sparse hit ratio: next click always nearest neighbor gives HR@1 = 1") {
    // two products with identical vectors; p_cold is sparse, p_hot is its twin
    std::vector<std::pair<std::string, EmbeddingVector>> entries = {
        {"p_cold", {1.0f, 0.0f}}, {"p_hot", {1.0f, 0.0f}}, {"p_other", {0.0f, 1.0f}}};
    EmbeddingTable table(2, std::move(entries), {"T", ""});
    std::vector<Event> events;
    // p_other is popular (many clicks); p_cold clicked once, followed by p_hot
    int t = 0;
    for (int i = 0; i < 50; ++i)
        events.push_back(ev("u2", "p_other", EventType::click, "warm", ++t));
    for (int i = 0; i < 30; ++i)
        events.push_back(ev("u2", "p_hot", EventType::click, "warm", ++t));
    events.push_back(ev("u1", "p_cold", EventType::click, "s1", ++t));
    events.push_back(ev("u1", "p_hot", EventType::click, "s1", ++t));
    auto sessions = ingest::build_sessions(events);
    SparseHitRatioConfig cfg;
    cfg.ks = {1, 5};
    auto report = sparse_hit_ratio(table, sessions, events, cfg);
    CHECK(report.value("", 1.0) == doctest::Approx(1.0));
    CHECK(report.value("", 5.0) == doctest::Approx(1.0));
}

TEST_CASE("sparse hit ratio is non-decreasing in k") {
    Rng rng(41);
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    const int n = 30;
    for (int i = 0; i < n; ++i) {
        EmbeddingVector v(8);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        entries.emplace_back("p" + std::to_string(i), v);
    }
    EmbeddingTable table(8, std::move(entries), {"T", ""});
    std::vector<Event> events;
    int t = 0;
    // skewed clicks: low-index products get many, high-index few
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < (n - i); ++c)
            events.push_back(ev("u_warm", "p" + std::to_string(i), EventType::click,
                                "warm" + std::to_string(i), ++t));
    for (int s = 0; s < 20; ++s) {
        std::string session = "q" + std::to_string(s);
        for (int c = 0; c < 5; ++c)
            events.push_back(ev("u1", "p" + std::to_string(rng.index(n)), EventType::click,
                                session, ++t));
    }
    auto sessions = ingest::build_sessions(events);
    SparseHitRatioConfig cfg;
    cfg.ks = {1, 2, 5, 10, 20};
    cfg.sparse_quantile = 0.10;
    auto report = sparse_hit_ratio(table, sessions, events, cfg);
    double prev = -1.0;
    for (std::size_t k : cfg.ks) {
        double hr = report.value("", static_cast<double>(k));
        CHECK(hr >= prev);
        CHECK(hr >= 0.0);
        CHECK(hr <= 1.0);
        prev = hr;
    }
}

TEST_CASE("sparse set construction follows the ascending click-mass quantile") {
    // clicks: a:1, b:1, c:2, d:16  (total 20; 5% budget = 1 -> only a)
    std::vector<Event> events;
    int t = 0;
    events.push_back(ev("u", "a", EventType::click, "s0", ++t));
    events.push_back(ev("u", "b", EventType::click, "s0", ++t));
    for (int i = 0; i < 2; ++i) events.push_back(ev("u", "c", EventType::click, "s0", ++t));
    for (int i = 0; i < 16; ++i) events.push_back(ev("u", "d", EventType::click, "s0", ++t));
    std::vector<std::pair<std::string, EmbeddingVector>> entries = {{"a", {1.f, 0.f}},
                                                                    {"b", {0.9f, 0.1f}},
                                                                    {"c", {0.f, 1.f}},
                                                                    {"d", {0.5f, 0.5f}}};
    EmbeddingTable table(2, std::move(entries), {"T", ""});
    auto sessions = ingest::build_sessions(events);
    SparseHitRatioConfig cfg;
    cfg.sparse_quantile = 0.05;
    cfg.ks = {1};
    auto report = sparse_hit_ratio(table, sessions, events, cfg);
    for (const auto& [name, v] : report.counters)
        if (name == "sparse_products") CHECK(v == doctest::Approx(1.0)); // 'a' only (tie: 'a' < 'b')
}

TEST_CASE("return prediction: separable toy reaches F1 = 1") {
    std::vector<ReturnExample> examples;
    Rng rng(51);
    while (examples.size() < 400) {
        double x = rng.normal();
        double y = rng.normal();
        if (std::fabs(x + y) < 0.4) continue; // margin keeps the toy separable
        int label = x + y > 0 ? 1 : 0;
        examples.push_back(ReturnExample{{x, y}, label});
    }
    LogRegConfig cfg;
    cfg.iters = 3000;
    cfg.learning_rate = 1.0;
    cfg.reg = 1e-6;
    auto result = return_predict_train_eval(examples, 0.8, cfg);
    CHECK(result.f1 == doctest::Approx(1.0));
    CHECK(!result.degenerate_precision);
}

TEST_CASE("return prediction: all-negative predictions flag degenerate precision") {
    // labels present in train but test region far on the negative side
    std::vector<ReturnExample> examples;
    for (int i = 0; i < 100; ++i)
        examples.push_back(ReturnExample{{static_cast<double>(i % 7)}, i % 7 == 6 ? 1 : 0});
    // test slice with only negatives, extremely negative feature
    for (int i = 0; i < 25; ++i) examples.push_back(ReturnExample{{-50.0}, 0});
    LogRegConfig cfg;
    cfg.iters = 200;
    auto result = return_predict_train_eval(examples, 0.8, cfg);
    CHECK(result.degenerate_precision);
    CHECK(result.precision == 0.0);
}

TEST_CASE("return prediction: single-class train split is an error") {
    std::vector<ReturnExample> examples;
    for (int i = 0; i < 50; ++i) examples.push_back(ReturnExample{{1.0 * i}, 0});
    examples.push_back(ReturnExample{{99.0}, 1}); // only positive lands in test
    CHECK_THROWS_AS((void)return_predict_train_eval(examples, 0.8, LogRegConfig{}), DataError);
}

TEST_CASE("return features: shape contract and cold users") {
    Catalog catalog = brand_catalog(6, 2);
    auto table = brand_one_hot_table(catalog, 2);
    std::vector<ReturnRecord> history = {
        {"u_known", "p0", "o1", 1, true},
        {"u_known", "p1", "o2", 2, false},
    };
    ReturnStats stats = build_return_stats(history, catalog);
    std::vector<ReturnRecord> carts = {
        {"u_known", "p2", "o3", 3, false},
        {"u_cold", "p3", "o4", 4, true},
    };
    auto built = build_return_features(carts, stats, catalog, &table, nullptr);
    REQUIRE(built.examples.size() == 2);
    const std::size_t want = 5 + 2 + 3 + 2 + 2; // groups 1..3 + d + d
    CHECK(built.examples[0].features.size() == want);
    CHECK(built.examples[1].features.size() == want);
    // cold user: zero history features, flag 0
    const auto& cold = built.examples[1].features;
    CHECK(cold[0] == 0.0);
    CHECK(cold[1] == 0.0);
    CHECK(cold[2] == 0.0);
    CHECK(cold[3] == 0.0);
    CHECK(cold[4] == 0.0);
    // known user: flag 1, one prior return
    const auto& known = built.examples[0].features;
    CHECK(known[4] == 1.0);
    CHECK(known[0] == 1.0);
}

TEST_CASE("return features: unknown product dropped with count; shuffle is pure") {
    Catalog catalog = brand_catalog(4, 2);
    auto table = brand_one_hot_table(catalog, 2);
    ReturnStats stats = build_return_stats({}, catalog);
    std::vector<ReturnRecord> carts = {
        {"u1", "p0", "o1", 1, false},
        {"u1", "zz_unknown", "o1", 2, true},
        {"u2", "p1", "o2", 3, true},
    };
    auto built = build_return_features(carts, stats, catalog, &table, nullptr);
    CHECK(built.examples.size() == 2);
    CHECK(built.dropped_unknown_product == 1);

    std::vector<ReturnRecord> shuffled = {carts[2], carts[0], carts[1]};
    auto built2 = build_return_features(shuffled, stats, catalog, &table, nullptr);
    REQUIRE(built2.examples.size() == 2);
    // same examples, different order
    CHECK(built2.examples[0].features == built.examples[1].features);
    CHECK(built2.examples[1].features == built.examples[0].features);
}

TEST_CASE("report CSV carries task:series, embedding, x, metric") {
    EvalReport report;
    report.task = "attributes";
    report.embedding = "P2V";
    report.add("brand", 10, 0.625);
    report.add("", 1, 0.5);
    auto path = std::string("/tmp/embkit_report_test.csv");
    write_report_csv(report, path);
    std::ifstream in(path);
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(header == "task,embedding,x,metric");
    CHECK(row1 == "attributes:brand,P2V,10,0.625000");
    CHECK(row2 == "attributes,P2V,1,0.500000");
    std::remove(path.c_str());
}
