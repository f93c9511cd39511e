#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embkit/embedding.hpp"
#include "embkit/types.hpp"

namespace embkit::eval {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ReportRow {
    std::string series; // e.g. attribute name or metric name; may be empty
    double x = 0.0;     // k, click position, ...
    double value = 0.0;
};

struct EvalReport {
    std::string task;
    std::string embedding;
    std::vector<ReportRow> rows;
    /// Named counters (skipped sessions, uncovered queries, ...).
    std::vector<std::pair<std::string, double>> counters;

    void add(std::string series, double x, double value) {
        rows.push_back(ReportRow{std::move(series), x, value});
    }
    void count(std::string name, double v) { counters.emplace_back(std::move(name), v); }
    /// First row value for (series, x); throws NotFoundError when absent.
    double value(const std::string& series, double x) const;
};

/// CSV with header "task,embedding,x,metric"; rows with a series label write
/// the task column as "task:series".
void write_report_csv(const EvalReport& report, const std::string& path);

// ---------------------------------------------------------------------------
// Embeddings-to-attributes (precision@k)
// ---------------------------------------------------------------------------

struct AttributeTaskConfig {
    std::size_t sample_size = 1000;
    std::vector<std::size_t> ks = {1, 2, 5, 10, 15, 20};
    std::vector<SiKey> attributes = {SiKey::brand, SiKey::basecolor, SiKey::priceband};
    std::uint64_t seed = 7;
};

/// For each sampled query product: top-k product neighbors (SI tokens
/// excluded); precision@k for attribute a = fraction of those neighbors
/// sharing the query's a-value. Queries missing attribute a are excluded
/// from a's average (counted). Rows: series = attribute, x = k.
EvalReport attribute_precision_at_k(const EmbeddingTable& table, const Catalog& catalog,
                                    const AttributeTaskConfig& config = {});

// ---------------------------------------------------------------------------
// Clicked-purchased similarity (median rank per click position)
// ---------------------------------------------------------------------------

struct ClickedPurchasedConfig {
    std::size_t window = 14;           // last clicks before the purchase
    double coherence_threshold = 0.6;  // prune sessions below this median cosine
    int min_user_purchases = 3;        // distinct purchased products per user
    std::size_t max_sessions = 0;      // 0 = all; else seeded subsample
    std::uint64_t seed = 7;
};

/// Per session ending in a purchase: the last `window` clicks before the
/// final purchase. Sessions are pruned when the median cosine between clicks
/// and the purchased product — computed with `reference` so the pruned set is
/// identical for every table under test — is below the threshold. For click
/// position i (1 = most recent), reports the median rank of the clicked
/// product in the table's full-catalog similarity ordering around the
/// purchased product. Rows: x = position, value = median rank.
EvalReport clicked_purchased_rank(const EmbeddingTable& table,
                                  const std::vector<Session>& sessions,
                                  const EmbeddingTable& reference,
                                  const ClickedPurchasedConfig& config = {});

// ---------------------------------------------------------------------------
// Sparsity hit ratio (next-event prediction over sparse products)
// ---------------------------------------------------------------------------

struct SparseHitRatioConfig {
    double sparse_quantile = 0.05; // bottom click-mass fraction
    std::vector<std::size_t> ks = {1, 5, 10, 20};
    bool any_later_click = false;  // alternative hit definition (config'd open question)
    std::size_t max_queries = 0;   // 0 = all; else seeded subsample
    std::uint64_t seed = 7;
};

/// Sparse set: products accumulated in ascending click-count order while
/// their cumulative share of total clicks stays within the quantile. Every
/// sparse click with a following click is a query; HR@k = 1 iff the next
/// clicked product is among the query's top-k product neighbors. Queries a
/// table cannot answer (query token untrained) score 0 and are counted.
EvalReport sparse_hit_ratio(const EmbeddingTable& table, const std::vector<Session>& sessions,
                            const std::vector<Event>& events,
                            const SparseHitRatioConfig& config = {});

// ---------------------------------------------------------------------------
// Cart return prediction
// ---------------------------------------------------------------------------

/// One cart item with its label; order_id groups items bought together
/// (the synthetic world uses the session id).
struct ReturnRecord {
    std::string user_id;
    std::string product_id;
    std::string order_id;
    std::int64_t ts = 0;
    bool returned = false;
};

/// Aggregates computed on the history (train) slice only.
struct ReturnStats {
    struct UserStats {
        double returned_qty = 0.0;
        double returned_revenue = 0.0; // price-segment proxy
        double orders = 0.0;
        double purchases = 0.0;
        std::vector<std::string> purchased; // for the mean-vector user embedding
    };
    std::unordered_map<std::string, UserStats> users;
    std::unordered_map<std::string, std::pair<double, double>> product_returns; // returns, total
    double global_return_rate = 0.0;
    double smoothing = 5.0; // pseudo-count toward the global rate
};

ReturnStats build_return_stats(const std::vector<ReturnRecord>& history, const Catalog& catalog);

/// Feature vector assembled in documented order:
///   group 1 (5): user returned qty, returned revenue proxy, orders,
///                purchases, has-history flag
///   group 2 (2): product smoothed return score, price segment in [0, 1]
///   group 3 (3): order size, order mean price segment, distinct products
///   group 4 (d): product embedding            (when tables provided)
///   group 5 (d): user embedding — user_table vector when given, else the
///                mean of history-purchased product vectors, else zeros
struct ReturnExample {
    std::vector<double> features;
    int label = 0;
};

struct ReturnFeatureResult {
    std::vector<ReturnExample> examples;
    std::size_t dropped_unknown_product = 0;
};

ReturnFeatureResult build_return_features(const std::vector<ReturnRecord>& carts,
                                          const ReturnStats& stats, const Catalog& catalog,
                                          const EmbeddingTable* product_table,
                                          const EmbeddingTable* user_table);

struct LogRegConfig {
    double learning_rate = 0.5;
    int iters = 500;
    double reg = 1e-4;
    double threshold = 0.5;
};

struct ReturnPredictionResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate_precision = false; // no positive predictions
    std::size_t n_train = 0, n_test = 0;
};

/// Logistic regression by full-batch gradient descent with L2 regularization
/// on z-scored features; threshold 0.5; metrics for the positive (returned)
/// class. Examples are split in order: the first `train_fraction` train.
/// A single-class train split is an error.
ReturnPredictionResult return_predict_train_eval(const std::vector<ReturnExample>& examples,
                                                 double train_fraction,
                                                 const LogRegConfig& config = {});

struct ReturnTaskConfig {
    double train_fraction = 0.8;
    bool include_embeddings = true;
    LogRegConfig logreg;
};

/// End-to-end return task: order records by timestamp, build stats on the
/// train slice, assemble features (embedding groups only when configured and
/// tables provided), train and evaluate. Deterministic.
ReturnPredictionResult run_return_prediction(std::vector<ReturnRecord> records,
                                             const Catalog& catalog,
                                             const EmbeddingTable* product_table,
                                             const EmbeddingTable* user_table,
                                             const ReturnTaskConfig& config = {});

/// Report rows: series precision/recall/f1 at x = 0.
EvalReport return_prediction_report(const ReturnPredictionResult& result,
                                    const std::string& embedding_name);

} // namespace embkit::eval
