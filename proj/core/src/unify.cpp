#include "embkit/unify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace embkit::unify {

std::string unify_method_name(UnifyMethod m) {
    switch (m) {
        case UnifyMethod::weighted_average: return "weighted_average";
        case UnifyMethod::additive: return "additive";
        case UnifyMethod::hadamard: return "hadamard";
        case UnifyMethod::max_pool: return "max_pool";
    }
    return "?";
}

UnifyMethod parse_unify_method(const std::string& name) {
    if (name == "weighted_average") return UnifyMethod::weighted_average;
    if (name == "additive") return UnifyMethod::additive;
    if (name == "hadamard") return UnifyMethod::hadamard;
    if (name == "max_pool") return UnifyMethod::max_pool;
    throw ConfigError("unknown unification method: " + name);
}

void UnifyConfig::validate() const {
    if (w_image < 0.0 || w_psv < 0.0)
        throw ConfigError("unify: weights must be nonnegative");
    if (method == UnifyMethod::weighted_average && w_image + w_psv <= 0.0)
        throw ConfigError("unify: weighted_average needs a positive weight sum");
}

EmbeddingTable unify(const EmbeddingTable& tableA, const EmbeddingTable& tableB,
                     const UnifyConfig& config, EmbeddingTable::Metadata metadata) {
    config.validate();
    if (tableA.dimension() != tableB.dimension())
        throw UsageError("unify: dimension mismatch (" + std::to_string(tableA.dimension()) +
                         " vs " + std::to_string(tableB.dimension()) + ")");
    const int d = tableA.dimension();

    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    std::size_t product_count = 0;
    for (std::size_t ia = 0; ia < tableA.size(); ++ia) {
        const std::string& token = tableA.tokens()[ia];
        if (is_si_token(token)) {
            // SI pass-through from table A, stored as-is
            auto v = tableA.vec_at(ia);
            entries.emplace_back(token, EmbeddingVector(v.begin(), v.end()));
            continue;
        }
        std::size_t ib = tableB.index_of(token);
        if (ib == EmbeddingTable::npos) continue;
        double na = tableA.norm_at(ia);
        double nb = tableB.norm_at(ib);
        if (na == 0.0 || nb == 0.0) continue; // untrained on one side
        auto a = tableA.vec_at(ia);
        auto b = tableB.vec_at(ib);
        double sa = config.normalize_inputs ? 1.0 / na : 1.0;
        double sb = config.normalize_inputs ? 1.0 / nb : 1.0;

        EmbeddingVector out(d);
        switch (config.method) {
            case UnifyMethod::weighted_average:
                for (int k = 0; k < d; ++k)
                    out[k] = static_cast<float>(config.w_image * a[k] * sa +
                                                config.w_psv * b[k] * sb);
                break;
            case UnifyMethod::additive:
                for (int k = 0; k < d; ++k)
                    out[k] = static_cast<float>(a[k] * sa + b[k] * sb);
                break;
            case UnifyMethod::hadamard:
                for (int k = 0; k < d; ++k)
                    out[k] = static_cast<float>(a[k] * sa * b[k] * sb);
                break;
            case UnifyMethod::max_pool:
                for (int k = 0; k < d; ++k)
                    out[k] = static_cast<float>(std::max(a[k] * sa, b[k] * sb));
                break;
        }
        entries.emplace_back(token, std::move(out));
        ++product_count;
    }
    if (product_count == 0)
        throw DataError("unify: no product tokens shared by both tables");
    return EmbeddingTable(d, std::move(entries), std::move(metadata));
}

GridSearchResult grid_search_weights(const EmbeddingTable& tableA, const EmbeddingTable& tableB,
                                     const ValidationTask& task, double grid_step) {
    if (!(grid_step > 0.0) || grid_step > 1.0)
        throw ConfigError("grid search: step must be in (0, 1]");
    if (!task.evaluate) throw UsageError("grid search: validation task has no evaluator");

    const int steps = static_cast<int>(std::lround(1.0 / grid_step));
    GridSearchResult result;
    bool have_best = false;
    double best_metric = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double w_image = static_cast<double>(i) / steps;
        double w_psv = 1.0 - w_image;
        UnifyConfig cfg;
        cfg.method = UnifyMethod::weighted_average;
        cfg.w_image = w_image;
        cfg.w_psv = w_psv;
        double metric;
        try {
            EmbeddingTable mixed = unify(tableA, tableB, cfg);
            metric = task.evaluate(mixed);
        } catch (const Error& e) {
            throw DataError("grid search failed at (w_image=" + std::to_string(w_image) +
                            ", w_psv=" + std::to_string(w_psv) + "): " + e.what());
        }
        result.trace.push_back(GridPoint{w_image, w_psv, metric});
        bool improves = !have_best || (task.higher_is_better ? metric > best_metric
                                                             : metric < best_metric);
        if (improves) { // strict: ties keep the smaller w_image seen first
            have_best = true;
            best_metric = metric;
            result.w_image = w_image;
            result.w_psv = w_psv;
        }
    }
    return result;
}

void write_grid_trace_csv(const GridSearchResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "w_image,w_psv,metric\n";
    char buf[96];
    for (const GridPoint& p : result.trace) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f\n", p.w_image, p.w_psv, p.metric);
        out << buf;
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

} // namespace embkit::unify
