#include <doctest.h>

#include <cmath>

#include "embkit/mf.hpp"
#include "embkit/rng.hpp"
#include "oracles.hpp"

using namespace embkit;
using namespace embkit::mf;

namespace {

InteractionMatrix tiny_matrix() {
    return InteractionMatrix::from_triples({
        {{"u1", "a"}, 2.0}, {{"u1", "b"}, 1.0}, {{"u2", "b"}, 3.0}, {{"u2", "c"}, 1.0},
        {{"u3", "a"}, 1.0}, {{"u3", "c"}, 2.0}, {{"u3", "d"}, 1.0},
    });
}

BprModel random_model(int n_users, int n_items, int dim, std::uint64_t seed) {
    BprModel m;
    m.dim = dim;
    Rng rng(seed);
    for (int u = 0; u < n_users; ++u) {
        m.user_ids.push_back("u" + std::to_string(u));
        m.user_index.emplace(m.user_ids.back(), u);
        m.user_bias.push_back(rng.normal(0.0, 0.3));
    }
    for (int p = 0; p < n_items; ++p) {
        m.item_ids.push_back("p" + std::to_string(p));
        m.item_index.emplace(m.item_ids.back(), p);
        m.item_bias.push_back(rng.normal(0.0, 0.3));
    }
    m.alpha = rng.normal(0.0, 0.3);
    m.user_factors.resize(static_cast<std::size_t>(n_users) * dim);
    m.item_factors.resize(static_cast<std::size_t>(n_items) * dim);
    for (auto& x : m.user_factors) x = rng.normal(0.0, 0.5);
    for (auto& x : m.item_factors) x = rng.normal(0.0, 0.5);
    return m;
}

} // namespace

TEST_CASE("InteractionMatrix sums duplicates and stores no zeros") {
    auto m = InteractionMatrix::from_triples(
        {{{"u", "a"}, 1.0}, {{"u", "a"}, 2.0}, {{"u", "b"}, 0.0}});
    CHECK(m.n_rows() == 1);
    CHECK(m.n_cols() == 2); // b got an index but no stored entry
    CHECK(m.nnz() == 1);
    CHECK(m.row_values(0)[0] == doctest::Approx(3.0));
}

TEST_CASE("bpr_score: zero parameters score zero") {
    BprModel m = random_model(1, 1, 2, 1);
    m.alpha = 0;
    m.user_bias[0] = 0;
    m.item_bias[0] = 0;
    m.user_factors = {0, 0};
    m.item_factors = {0, 0};
    CHECK(bpr_score(m, "u0", "p0") == doctest::Approx(0.0));
}

TEST_CASE("bpr_score: alpha + beta_u + beta_p + dot") {
    BprModel m = random_model(1, 1, 2, 1);
    m.alpha = 1.0;
    m.user_bias[0] = 0.5;
    m.item_bias[0] = -0.5;
    m.user_factors = {1, 1};
    m.item_factors = {1, 1};
    CHECK(bpr_score(m, "u0", "p0") == doctest::Approx(3.0)); // 1 + 0.5 - 0.5 + 2
    CHECK_THROWS_AS((void)bpr_score(m, "u9", "p0"), NotFoundError);
    CHECK_THROWS_AS((void)bpr_score(m, "u0", "p9"), NotFoundError);
}

TEST_CASE("pairwise score difference is independent of alpha and beta_u") {
    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        BprModel m = random_model(2, 3, 4, 100 + rep);
        double d1 = m.score("u0", "p1") - m.score("u0", "p2");
        m.alpha += rng.normal(0.0, 2.0);
        m.user_bias[0] += rng.normal(0.0, 2.0);
        double d2 = m.score("u0", "p1") - m.score("u0", "p2");
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
    }
}

TEST_CASE("per-triple objective at x_ui = x_uj is -log 2") {
    BprModel m = random_model(1, 2, 3, 2);
    // make both items identical so the difference is exactly zero
    for (int k = 0; k < 3; ++k) m.item_factors[3 + k] = m.item_factors[k];
    m.item_bias[1] = m.item_bias[0];
    CHECK(bpr_triple_objective(m, 0, 0, 1, 0.0) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("BPR analytic gradient matches central finite differences") {
    const double reg = 0.02;
    BprModel m = random_model(3, 4, 5, 42);
    const std::size_t u = 1, i = 2, j = 0;
    auto obj = [&]() { return bpr_triple_objective(m, u, i, j, reg); };
    BprTripleGrad g = bpr_triple_gradient(m, u, i, j, reg);

    double fd_bi = oracles::central_diff(obj, m.item_bias[i]);
    double fd_bj = oracles::central_diff(obj, m.item_bias[j]);
    CHECK(oracles::rel_err(fd_bi, g.d_beta_i) < 1e-4);
    CHECK(oracles::rel_err(fd_bj, g.d_beta_j) < 1e-4);
    // alpha and beta_u cancel: finite difference must be ~0
    CHECK(std::fabs(oracles::central_diff(obj, m.alpha)) < 1e-8);
    CHECK(std::fabs(oracles::central_diff(obj, m.user_bias[u])) < 1e-8);
    for (int k = 0; k < m.dim; ++k) {
        CHECK(oracles::rel_err(oracles::central_diff(obj, m.user_factors[u * m.dim + k]),
                               g.d_user[k]) < 1e-4);
        CHECK(oracles::rel_err(oracles::central_diff(obj, m.item_factors[i * m.dim + k]),
                               g.d_item_i[k]) < 1e-4);
        CHECK(oracles::rel_err(oracles::central_diff(obj, m.item_factors[j * m.dim + k]),
                               g.d_item_j[k]) < 1e-4);
    }
}

TEST_CASE("bpr_train improves its objective and ranks planted groups (AUC > 0.9)") {
    // two disjoint user groups, disjoint product sets, one held-out positive each
    Rng rng(9);
    std::vector<std::pair<std::pair<std::string, std::string>, double>> triples;
    std::vector<std::pair<std::string, std::string>> held_out;
    for (int u = 0; u < 20; ++u) {
        int group = u < 10 ? 0 : 1;
        std::vector<int> items;
        for (int p = 0; p < 10; ++p) items.push_back(group * 10 + p);
        deterministic_shuffle(items, rng);
        for (int k = 0; k < 6; ++k)
            triples.push_back({{"u" + std::to_string(u), "p" + std::to_string(items[k])}, 1.0});
        held_out.emplace_back("u" + std::to_string(u), "p" + std::to_string(items[6]));
    }
    auto matrix = InteractionMatrix::from_triples(triples);
    BprConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 40;
    cfg.learning_rate = 0.08;
    cfg.seed = 4;
    auto result = bpr_train(matrix, cfg);
    REQUIRE(result.loss_trace.size() == 40);
    CHECK(result.loss_trace.back() > result.loss_trace.front());

    // AUC over (held-out positive, other-group negative) pairs
    std::size_t wins = 0, total = 0;
    for (const auto& [user, pos] : held_out) {
        int uidx = std::stoi(user.substr(1));
        int group = uidx < 10 ? 0 : 1;
        double pos_score = result.model.score(user, pos);
        for (int p = 0; p < 20; ++p) {
            int pgroup = p < 10 ? 0 : 1;
            if (pgroup == group) continue;
            if (pos_score > result.model.score(user, "p" + std::to_string(p))) ++wins;
            ++total;
        }
    }
    double auc = static_cast<double>(wins) / static_cast<double>(total);
    CHECK(auc > 0.9);
}

TEST_CASE("bpr_train skips users with every product observed") {
    auto matrix = InteractionMatrix::from_triples(
        {{{"u_full", "a"}, 1.0}, {{"u_full", "b"}, 1.0}, {{"u2", "a"}, 1.0}});
    BprConfig cfg;
    cfg.dim = 2;
    cfg.epochs = 1;
    auto result = bpr_train(matrix, cfg);
    CHECK(result.skipped_users == 1);
}

TEST_CASE("NMF recovers a rank-1 matrix to 1e-6") {
    auto m = InteractionMatrix::from_triples(
        {{{"r0", "c0"}, 2.0}, {{"r0", "c1"}, 2.0}, {{"r1", "c0"}, 2.0}, {{"r1", "c1"}, 2.0}});
    NmfConfig cfg;
    cfg.max_iters = 2000;
    cfg.rel_tol = 0.0;
    auto result = nmf_factorize(m, 1, cfg);
    CHECK(result.error_trace.back() < 1e-6);
    for (double x : result.row_factors) CHECK(x >= 0.0);
    for (double x : result.col_factors) CHECK(x >= 0.0);
}

TEST_CASE("NMF on 2x2 identity reaches error < 1e-3") {
    auto m = InteractionMatrix::from_triples({{{"r0", "c0"}, 1.0}, {{"r1", "c1"}, 1.0}});
    NmfConfig cfg;
    cfg.max_iters = 5000;
    cfg.rel_tol = 0.0;
    cfg.seed = 3;
    auto result = nmf_factorize(m, 2, cfg);
    CHECK(result.error_trace.back() < 1e-3);
}

TEST_CASE("NMF rejects negative entries and all-zero input") {
    auto neg = InteractionMatrix::from_triples({{{"r", "c"}, -1.0}});
    CHECK_THROWS_AS((void)nmf_factorize(neg, 1), UsageError);
    InteractionMatrix empty;
    CHECK_THROWS_AS((void)nmf_factorize(empty, 1), DegenerateInputError);
}

TEST_CASE("NMF factors stay nonnegative and error never increases") {
    auto m = tiny_matrix();
    NmfConfig cfg;
    cfg.max_iters = 120;
    cfg.rel_tol = 0.0;
    cfg.seed = 11;
    double prev = -1.0;
    bool all_nonneg = true;
    auto observer = [&](int, double err, std::span<const double> W, std::span<const double> H) {
        for (double x : W)
            if (x < 0.0) all_nonneg = false;
        for (double x : H)
            if (x < 0.0) all_nonneg = false;
        if (prev >= 0.0) CHECK(err <= prev + 1e-12 * std::max(1.0, prev));
        prev = err;
    };
    (void)nmf_factorize(m, 2, cfg, observer);
    CHECK(all_nonneg);
}

TEST_CASE("NMF is deterministic under a fixed seed") {
    auto m = tiny_matrix();
    NmfConfig cfg;
    cfg.max_iters = 50;
    cfg.seed = 21;
    auto a = nmf_factorize(m, 2, cfg);
    auto b = nmf_factorize(m, 2, cfg);
    CHECK(a.col_factors == b.col_factors);
    CHECK(a.row_factors == b.row_factors);
}
