#pragma once

#include <functional>
#include <string>
#include <vector>

#include "embkit/embedding.hpp"

namespace embkit::unify {

enum class UnifyMethod { weighted_average, additive, hadamard, max_pool };

std::string unify_method_name(UnifyMethod m);
UnifyMethod parse_unify_method(const std::string& name);

/// Mixture settings. w_image applies to table A (the image side), w_psv to
/// table B (the word2vec side). Weights must be nonnegative with a positive
/// sum; the pipeline's grid search always emits w_image + w_psv = 1, while
/// the raw API accepts any positive scaling (cosine rankings are invariant
/// under joint scaling).
struct UnifyConfig {
    UnifyMethod method = UnifyMethod::weighted_average;
    double w_image = 0.1;
    double w_psv = 0.9;
    bool normalize_inputs = true; // L2-normalize each source vector first

    void validate() const;
};

/// Combines two tables over the intersection of their product tokens.
/// SI tokens present in tableA pass through unchanged. Tokens with a
/// zero-norm vector in either source are dropped (they are untrained).
/// Throws UsageError on dimension mismatch, DataError on empty intersection.
EmbeddingTable unify(const EmbeddingTable& tableA, const EmbeddingTable& tableB,
                     const UnifyConfig& config, EmbeddingTable::Metadata metadata = {});

/// Scalar quality measure of an embedding table on some validation task.
struct ValidationTask {
    std::function<double(const EmbeddingTable&)> evaluate;
    bool higher_is_better = true;
    std::string name;
};

struct GridPoint {
    double w_image;
    double w_psv;
    double metric;
};

struct GridSearchResult {
    double w_image = 0.0;
    double w_psv = 1.0;
    std::vector<GridPoint> trace;
};

/// Evaluates weighted_average mixtures over w_image in {0, step, ..., 1}
/// with w_psv = 1 - w_image, and returns the best pair; ties break toward
/// smaller w_image. Task failures propagate annotated with the weight pair.
GridSearchResult grid_search_weights(const EmbeddingTable& tableA, const EmbeddingTable& tableB,
                                     const ValidationTask& task, double grid_step = 0.1);

/// Trace CSV: header then one "w_image,w_psv,metric" row per grid point.
void write_grid_trace_csv(const GridSearchResult& result, const std::string& path);

} // namespace embkit::unify
