#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "embkit/embedding.hpp"
#include "embkit/types.hpp"

namespace embkit::mf {

/// Sparse nonnegative user x product matrix in row-major adjacency form.
/// Zeros are never stored; column indices are sorted within each row.
class InteractionMatrix {
public:
    InteractionMatrix() = default;

    /// Entries are ((user, product), value) triples; duplicates are summed.
    static InteractionMatrix from_triples(
        const std::vector<std::pair<std::pair<std::string, std::string>, double>>& triples);

    /// Total clicks+bags+purchases per (user, product) pair.
    static InteractionMatrix interaction_counts(const std::vector<Event>& events);

    std::size_t n_rows() const { return row_ids_.size(); }
    std::size_t n_cols() const { return col_ids_.size(); }
    std::size_t nnz() const { return values_.size(); }

    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::vector<std::string>& col_ids() const { return col_ids_; }
    std::size_t row_index(std::string_view id) const;
    std::size_t col_index(std::string_view id) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Sorted column indices of one row.
    std::span<const std::uint32_t> row_cols(std::size_t r) const;
    std::span<const double> row_values(std::size_t r) const;

    void for_each(const std::function<void(std::size_t r, std::size_t c, double v)>& fn) const;

private:
    std::vector<std::string> row_ids_, col_ids_;
    std::unordered_map<std::string, std::size_t> row_index_, col_index_;
    std::vector<std::size_t> row_ptr_; // size n_rows+1
    std::vector<std::uint32_t> cols_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// BPR-MF
// ---------------------------------------------------------------------------

struct BprConfig {
    int dim = 100;
    double learning_rate = 0.05;
    double reg = 0.01;      // lambda on the latent factors
    int epochs = 20;        // each epoch samples |positives| triples
    double init_sd = 0.01;  // factor init noise
    std::uint64_t seed = 1;
};

/// x_up = alpha + beta_u + beta_p + gamma_u . gamma_p. Biases start at zero;
/// alpha and beta_u receive no gradient (they cancel in the pairwise
/// difference) and are kept for the scoring identity.
struct BprModel {
    int dim = 0;
    double alpha = 0.0;
    std::vector<std::string> user_ids, item_ids;
    std::unordered_map<std::string, std::size_t> user_index, item_index;
    std::vector<double> user_bias, item_bias;
    std::vector<double> user_factors, item_factors; // row-major, dim per row

    std::span<const double> user_vec(std::size_t u) const {
        return {user_factors.data() + u * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> item_vec(std::size_t p) const {
        return {item_factors.data() + p * dim, static_cast<std::size_t>(dim)};
    }

    /// Score by id; throws NotFoundError for unknown ids.
    double score(std::string_view user, std::string_view item) const;

    /// Product factors as an embedding table (biases excluded).
    EmbeddingTable export_items(const std::string& method,
                                const std::string& config_digest) const;
    /// User factors, for the return-prediction feature option.
    EmbeddingTable export_users(const std::string& method,
                                const std::string& config_digest) const;
};

double bpr_score(const BprModel& model, std::string_view user, std::string_view item);

/// Per-triple objective log(sigmoid(x_ui - x_uj)) - reg * (|g_u|^2 + |g_i|^2
/// + |g_j|^2); the regularizer covers the latent factors only. Exposed so the
/// finite-difference oracle can probe exactly what training ascends.
double bpr_triple_objective(const BprModel& model, std::size_t u, std::size_t i, std::size_t j,
                            double reg);

/// Analytic gradient of bpr_triple_objective for the touched parameters.
struct BprTripleGrad {
    double d_beta_i = 0.0, d_beta_j = 0.0;
    std::vector<double> d_user, d_item_i, d_item_j;
};
BprTripleGrad bpr_triple_gradient(const BprModel& model, std::size_t u, std::size_t i,
                                  std::size_t j, double reg);

struct BprTrainResult {
    BprModel model;
    std::vector<double> loss_trace; // mean per-triple objective per epoch
    std::size_t skipped_users = 0;  // users with every product observed
};

/// Stochastic ascent over (u, i, j) triples: i positive for u, j uniform over
/// u's unobserved products. Deterministic under config.seed.
BprTrainResult bpr_train(const InteractionMatrix& matrix, const BprConfig& config);

// ---------------------------------------------------------------------------
// NMF (Frobenius multiplicative updates)
// ---------------------------------------------------------------------------

struct NmfConfig {
    int max_iters = 200;
    double rel_tol = 1e-5; // stop when relative error improvement drops below
    std::uint64_t seed = 1;
};

struct NmfResult {
    std::size_t rank = 0;
    std::vector<double> row_factors; // n_rows x rank, row-major (U)
    std::vector<double> col_factors; // n_cols x rank, row-major (V)
    std::vector<double> error_trace; // Frobenius error per iteration
    std::span<const double> row_vec(std::size_t r) const {
        return {row_factors.data() + r * rank, rank};
    }
    std::span<const double> col_vec(std::size_t c) const {
        return {col_factors.data() + c * rank, rank};
    }
};

/// Called after every multiplicative update with the current iteration,
/// Frobenius error, and both factors.
using NmfObserver =
    std::function<void(int iter, double frob_error, std::span<const double> row_factors,
                       std::span<const double> col_factors)>;

/// Factors a nonnegative sparse matrix with Lee-Seung multiplicative updates.
/// Factors stay elementwise nonnegative; the Frobenius error is non-increasing
/// across iterations. Fixed seed gives fixed output. All-zero input throws
/// DegenerateInputError.
NmfResult nmf_factorize(const InteractionMatrix& matrix, std::size_t rank,
                        const NmfConfig& config = {}, const NmfObserver& observer = nullptr);

} // namespace embkit::mf
