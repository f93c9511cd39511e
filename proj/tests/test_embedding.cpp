#include <doctest.h>

#include "embkit/embedding.hpp"
#include "embkit/rng.hpp"
#include "oracles.hpp"

using namespace embkit;

namespace {

EmbeddingTable make_table(std::vector<std::pair<std::string, EmbeddingVector>> entries,
                          int dim) {
    return EmbeddingTable(dim, std::move(entries));
}

} // namespace

TEST_CASE("cosine_similarity basics") {
    EmbeddingVector e1 = {1.0f, 0.0f};
    EmbeddingVector e2 = {0.0f, 1.0f};
    EmbeddingVector both = {1.0f, 1.0f};
    CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0));
    CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0));
    CHECK(cosine_similarity(both, e1) == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(std::fabs(cosine_similarity(both, e1) - 1.0 / std::sqrt(2.0)) < 1e-6);
}

TEST_CASE("cosine_similarity error paths") {
    EmbeddingVector a = {1.0f, 0.0f};
    EmbeddingVector b3 = {1.0f, 0.0f, 0.0f};
    EmbeddingVector zero = {0.0f, 0.0f};
    CHECK_THROWS_AS((void)cosine_similarity(a, b3), UsageError);
    CHECK_THROWS_AS((void)cosine_similarity(a, zero), DegenerateInputError);
    CHECK_THROWS_AS((void)cosine_similarity(zero, a), DegenerateInputError);
}

TEST_CASE("cosine is 1 on any nonzero vector against itself") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        EmbeddingVector v(8);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-9));
        EmbeddingVector w(8);
        for (auto& x : w) x = static_cast<float>(rng.normal());
        CHECK(std::fabs(cosine_similarity(v, w)) <= 1.0);
    }
}

TEST_CASE("top_k_neighbors: duplicate vector is nearest") {
    auto table = make_table({{"a", {1.0f, 2.0f}}, {"b", {1.0f, 2.0f}}, {"c", {-1.0f, 0.5f}}}, 2);
    auto nb = top_k_neighbors(table, "a", 1);
    REQUIRE(nb.size() == 1);
    CHECK(nb[0].token == "b");
    CHECK(nb[0].similarity == doctest::Approx(1.0));
}

TEST_CASE("top_k_neighbors: k larger than candidate count") {
    auto table = make_table({{"a", {1.0f, 0.0f}}, {"b", {0.0f, 1.0f}}}, 2);
    auto nb = top_k_neighbors(table, "a", 10);
    CHECK(nb.size() == 1);
}

TEST_CASE("top_k_neighbors matches the brute-force oracle") {
    Rng rng(7);
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    for (int i = 0; i < 5; ++i) {
        EmbeddingVector v(4);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        entries.emplace_back("t" + std::to_string(i), v);
    }
    auto table = make_table(entries, 4);
    auto got = top_k_neighbors(table, "t0", 3);
    auto want = oracles::brute_force_top_k(entries, "t0", 3);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].token == want[i].first);
        CHECK(got[i].similarity == doctest::Approx(want[i].second).epsilon(1e-9));
    }
}

TEST_CASE("top_k_neighbors: tie-break by ascending token") {
    auto table = make_table(
        {{"q", {1.0f, 0.0f}}, {"zz", {2.0f, 0.0f}}, {"aa", {3.0f, 0.0f}}, {"mm", {0.0f, 1.0f}}},
        2);
    auto nb = top_k_neighbors(table, "q", 3);
    REQUIRE(nb.size() == 3);
    CHECK(nb[0].token == "aa"); // same cosine as zz, smaller token first
    CHECK(nb[1].token == "zz");
    CHECK(nb[2].token == "mm");
}

TEST_CASE("top_k_neighbors: unknown query and filters") {
    auto table = make_table({{"a", {1.0f, 0.0f}}, {"brand=x", {1.0f, 0.1f}},
                             {"b", {0.9f, 0.1f}}},
                            2);
    CHECK_THROWS_AS((void)top_k_neighbors(table, "nope", 1), NotFoundError);
    auto nb = top_k_neighbors(table, "a", 5, product_token_filter);
    REQUIRE(nb.size() == 1);
    CHECK(nb[0].token == "b");
}

TEST_CASE("ranking is invariant under uniform positive scaling") {
    Rng rng(13);
    std::vector<std::pair<std::string, EmbeddingVector>> entries, scaled;
    for (int i = 0; i < 12; ++i) {
        EmbeddingVector v(6), sv(6);
        for (int k = 0; k < 6; ++k) {
            v[k] = static_cast<float>(rng.normal());
            sv[k] = 3.5f * v[k];
        }
        entries.emplace_back("t" + std::to_string(i), v);
        scaled.emplace_back("t" + std::to_string(i), sv);
    }
    auto t1 = make_table(entries, 6);
    auto t2 = make_table(scaled, 6);
    auto n1 = top_k_neighbors(t1, "t3", 5);
    auto n2 = top_k_neighbors(t2, "t3", 5);
    REQUIRE(n1.size() == n2.size());
    for (std::size_t i = 0; i < n1.size(); ++i) CHECK(n1[i].token == n2[i].token);
}

TEST_CASE("top_k(k1) is a prefix of top_k(k2) for k1 <= k2") {
    Rng rng(17);
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    for (int i = 0; i < 15; ++i) {
        EmbeddingVector v(5);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        entries.emplace_back("t" + std::to_string(i), v);
    }
    auto table = make_table(entries, 5);
    auto big = top_k_neighbors(table, "t0", 12);
    for (std::size_t k = 1; k <= 12; ++k) {
        auto small = top_k_neighbors(table, "t0", k);
        REQUIRE(small.size() == k);
        for (std::size_t i = 0; i < k; ++i) CHECK(small[i].token == big[i].token);
    }
}

TEST_CASE("EmbeddingTable validates entries") {
    CHECK_THROWS_AS(make_table({{"a", {1.0f}}}, 2), UsageError);           // wrong length
    CHECK_THROWS_AS(make_table({{"a", {1.0f}}, {"a", {2.0f}}}, 1), UsageError); // dup token
    EmbeddingVector bad = {std::numeric_limits<float>::infinity()};
    CHECK_THROWS_AS(make_table({{"a", bad}}, 1), UsageError); // non-finite
}
