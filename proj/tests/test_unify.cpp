#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "embkit/rng.hpp"
#include "embkit/unify.hpp"

using namespace embkit;
using namespace embkit::unify;

namespace {

EmbeddingTable table_of(std::vector<std::pair<std::string, EmbeddingVector>> entries, int dim,
                        const std::string& method = "T") {
    return EmbeddingTable(dim, std::move(entries), {method, ""});
}

EmbeddingTable random_table(const std::vector<std::string>& tokens, int dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    for (const auto& t : tokens) {
        EmbeddingVector v(dim);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        entries.emplace_back(t, v);
    }
    return table_of(std::move(entries), dim);
}

} // namespace

TEST_CASE("w_image=0, w_psv=1 reproduces normalized tableB exactly") {
    auto a = random_table({"p1", "p2", "p3"}, 4, 1);
    auto b = random_table({"p1", "p2", "p3"}, 4, 2);
    UnifyConfig cfg;
    cfg.w_image = 0.0;
    cfg.w_psv = 1.0;
    auto u = unify::unify(a, b, cfg);
    for (const auto& tok : u.tokens()) {
        auto uv = u.vec(tok);
        auto bv = b.vec(tok);
        double bn = 0;
        for (float x : bv) bn += double(x) * x;
        bn = std::sqrt(bn);
        for (int k = 0; k < 4; ++k)
            CHECK(double(uv[k]) == doctest::Approx(double(bv[k]) / bn).epsilon(1e-6));
    }
}

TEST_CASE("paper mixture weights on unit vectors: (0.1, 0.9)") {
    auto a = table_of({{"p", {1.0f, 0.0f}}}, 2);
    auto b = table_of({{"p", {0.0f, 1.0f}}}, 2);
    UnifyConfig cfg;
    cfg.w_image = 0.1;
    cfg.w_psv = 0.9;
    auto u = unify::unify(a, b, cfg);
    auto v = u.vec("p");
    CHECK(v[0] == doctest::Approx(0.1));
    CHECK(v[1] == doctest::Approx(0.9));
}

TEST_CASE("hadamard after normalization matches hand arithmetic") {
    auto a = table_of({{"p", {1.0f, 2.0f}}}, 2);
    auto b = table_of({{"p", {3.0f, 4.0f}}}, 2);
    UnifyConfig cfg;
    cfg.method = UnifyMethod::hadamard;
    auto u = unify::unify(a, b, cfg);
    auto v = u.vec("p");
    const double na = std::sqrt(5.0), nb = 5.0;
    CHECK(double(v[0]) == doctest::Approx((1.0 / na) * (3.0 / nb)).epsilon(1e-6));
    CHECK(double(v[1]) == doctest::Approx((2.0 / na) * (4.0 / nb)).epsilon(1e-6));
}

TEST_CASE("additive and max_pool combine normalized inputs") {
    auto a = table_of({{"p", {2.0f, 0.0f}}}, 2);
    auto b = table_of({{"p", {0.0f, 5.0f}}}, 2);
    UnifyConfig cfg;
    cfg.method = UnifyMethod::additive;
    auto add = unify::unify(a, b, cfg);
    CHECK(add.vec("p")[0] == doctest::Approx(1.0));
    CHECK(add.vec("p")[1] == doctest::Approx(1.0));
    cfg.method = UnifyMethod::max_pool;
    auto mx = unify::unify(a, b, cfg);
    CHECK(mx.vec("p")[0] == doctest::Approx(1.0));
    CHECK(mx.vec("p")[1] == doctest::Approx(1.0));
}

TEST_CASE("weighted_average with w_image=1 reproduces normalized image vectors") {
    auto a = random_table({"p1", "p2"}, 3, 5);
    auto b = random_table({"p1", "p2"}, 3, 6);
    UnifyConfig cfg;
    cfg.w_image = 1.0;
    cfg.w_psv = 0.0;
    auto u = unify::unify(a, b, cfg);
    for (const auto& tok : u.tokens()) {
        auto uv = u.vec(tok);
        auto av = a.vec(tok);
        double an = 0;
        for (float x : av) an += double(x) * x;
        an = std::sqrt(an);
        for (int k = 0; k < 3; ++k)
            CHECK(double(uv[k]) == doctest::Approx(double(av[k]) / an).epsilon(1e-6));
    }
}

TEST_CASE("output covers the intersection; SI tokens pass through from tableA") {
    auto a = table_of({{"p1", {1.0f, 0.0f}}, {"only_a", {1.0f, 1.0f}}, {"brand=x", {0.25f, 0.5f}}},
                      2);
    auto b = table_of({{"p1", {0.0f, 1.0f}}, {"only_b", {1.0f, 1.0f}}, {"neck=v", {0.1f, 0.2f}}},
                      2);
    auto u = unify::unify(a, b, UnifyConfig{});
    CHECK(u.contains("p1"));
    CHECK(!u.contains("only_a"));
    CHECK(!u.contains("only_b"));
    CHECK(!u.contains("neck=v"));       // B-side SI dropped
    REQUIRE(u.contains("brand=x"));     // A-side SI passes through unchanged
    auto si = u.vec("brand=x");
    CHECK(si[0] == doctest::Approx(0.25f));
    CHECK(si[1] == doctest::Approx(0.5f));
}

TEST_CASE("dimension mismatch and empty intersection are errors") {
    auto a = random_table({"p1"}, 3, 1);
    auto b2 = random_table({"p1"}, 2, 2);
    CHECK_THROWS_AS((void)unify::unify(a, b2, UnifyConfig{}), UsageError);
    auto disjoint = random_table({"q1"}, 3, 3);
    CHECK_THROWS_AS((void)unify::unify(a, disjoint, UnifyConfig{}), DataError);
}

TEST_CASE("unify is pointwise: each output token depends only on its two inputs") {
    auto a1 = random_table({"p1", "p2", "p3"}, 4, 7);
    auto b = random_table({"p1", "p2", "p3"}, 4, 8);
    auto u_all = unify::unify(a1, b, UnifyConfig{});
    // rebuild a table with only p2 and confirm the p2 output is identical
    std::vector<std::pair<std::string, EmbeddingVector>> sub_a, sub_b;
    auto va = a1.vec("p2");
    auto vb = b.vec("p2");
    sub_a.emplace_back("p2", EmbeddingVector(va.begin(), va.end()));
    sub_b.emplace_back("p2", EmbeddingVector(vb.begin(), vb.end()));
    auto u_one = unify::unify(table_of(std::move(sub_a), 4), table_of(std::move(sub_b), 4), UnifyConfig{});
    auto x = u_all.vec("p2");
    auto y = u_one.vec("p2");
    for (int k = 0; k < 4; ++k) CHECK(x[k] == y[k]);
}

TEST_CASE("joint weight scaling leaves cosine rankings unchanged") {
    std::vector<std::string> toks;
    for (int i = 0; i < 10; ++i) toks.push_back("p" + std::to_string(i));
    auto a = random_table(toks, 5, 11);
    auto b = random_table(toks, 5, 12);
    UnifyConfig c1;
    c1.w_image = 0.3;
    c1.w_psv = 0.7;
    UnifyConfig c2;
    c2.w_image = 0.3 * 4.0;
    c2.w_psv = 0.7 * 4.0;
    auto u1 = unify::unify(a, b, c1);
    auto u2 = unify::unify(a, b, c2);
    for (const auto& q : toks) {
        auto n1 = top_k_neighbors(u1, q, 5);
        auto n2 = top_k_neighbors(u2, q, 5);
        REQUIRE(n1.size() == n2.size());
        for (std::size_t i = 0; i < n1.size(); ++i) {
            CHECK(n1[i].token == n2[i].token);
            CHECK(n1[i].similarity == doctest::Approx(n2[i].similarity).epsilon(1e-6));
        }
    }
}

TEST_CASE("grid search: constant metric ties break toward w_image = 0") {
    auto a = random_table({"p1", "p2"}, 3, 1);
    auto b = random_table({"p1", "p2"}, 3, 2);
    ValidationTask task{[](const EmbeddingTable&) { return 1.0; }, true, "const"};
    auto result = grid_search_weights(a, b, task, 0.1);
    CHECK(result.w_image == doctest::Approx(0.0));
    CHECK(result.trace.size() == 11);
}

TEST_CASE("grid search recovers the informative side") {
    // images encode two planted clusters; PSV vectors are random noise
    Rng rng(31);
    std::vector<std::pair<std::string, EmbeddingVector>> img, psv;
    for (int i = 0; i < 40; ++i) {
        int cl = i % 2;
        EmbeddingVector v(6), n(6);
        for (int k = 0; k < 6; ++k) {
            v[k] = static_cast<float>((cl == 0 ? (k < 3 ? 1.0 : 0.0) : (k < 3 ? 0.0 : 1.0)) +
                                      0.05 * rng.normal());
            n[k] = static_cast<float>(rng.normal());
        }
        img.emplace_back("p" + std::to_string(i), v);
        psv.emplace_back("p" + std::to_string(i), n);
    }
    auto images = table_of(std::move(img), 6);
    auto noise = table_of(std::move(psv), 6);

    // metric: mean intra-cluster minus inter-cluster cosine (continuous, so
    // the grid has a unique optimum instead of a saturated plateau)
    ValidationTask task{[](const EmbeddingTable& t) {
                            double intra = 0, inter = 0;
                            int n_intra = 0, n_inter = 0;
                            for (std::size_t i = 0; i < t.size(); ++i)
                                for (std::size_t j = i + 1; j < t.size(); ++j) {
                                    double c = cosine_similarity(t.vec_at(i), t.vec_at(j));
                                    bool same = (std::stoi(t.tokens()[i].substr(1)) % 2) ==
                                                (std::stoi(t.tokens()[j].substr(1)) % 2);
                                    (same ? intra : inter) += c;
                                    (same ? n_intra : n_inter) += 1;
                                }
                            return intra / n_intra - inter / n_inter;
                        },
                        true, "cluster-margin"};
    auto result = grid_search_weights(images, noise, task, 0.1);
    CHECK(result.trace.size() == 11);
    CHECK(result.w_image >= 0.8);
}

TEST_CASE("grid trace CSV has exactly 11 rows at step 0.1") {
    auto a = random_table({"p1", "p2"}, 3, 1);
    auto b = random_table({"p1", "p2"}, 3, 2);
    ValidationTask task{[](const EmbeddingTable&) { return 0.5; }, true, "const"};
    auto result = grid_search_weights(a, b, task, 0.1);
    auto path = std::string("/tmp/embkit_grid_test.csv");
    write_grid_trace_csv(result, path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 12); // header + 11 grid points
    std::remove(path.c_str());
}

TEST_CASE("invalid weights are rejected") {
    UnifyConfig bad;
    bad.w_image = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    UnifyConfig zero;
    zero.w_image = 0.0;
    zero.w_psv = 0.0;
    CHECK_THROWS_AS(zero.validate(), ConfigError);
}
