// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "embkit/embedding.hpp"

namespace oracles {

/// Exhaustive nearest-neighbor ranking: raw cosine arithmetic over every
/// candidate, full sort, no shared code with top_k_neighbors.
inline std::vector<std::pair<std::string, double>> brute_force_top_k(
    const std::vector<std::pair<std::string, std::vector<float>>>& entries,
    const std::string& query, std::size_t k) {
    const std::vector<float>* qv = nullptr;
    for (const auto& [tok, v] : entries)
        if (tok == query) qv = &v;
    if (!qv) throw std::runtime_error("oracle: query missing");
    auto cosine = [](const std::vector<float>& a, const std::vector<float>& b) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dot += double(a[i]) * b[i];
            na += double(a[i]) * a[i];
            nb += double(b[i]) * b[i];
        }
        return dot / (std::sqrt(na) * std::sqrt(nb));
    };
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [tok, v] : entries) {
        if (tok == query) continue;
        scored.emplace_back(tok, cosine(*qv, v));
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

/// All ordered index pairs of one list, materialized; the combinatorial
/// ground truth for the pair generators.
inline std::vector<std::pair<std::string, std::string>> enumerate_prod_pairs(
    const std::vector<std::string>& list) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < list.size(); ++i)
        for (std::size_t j = 0; j < list.size(); ++j)
            if (i != j) out.emplace_back(list[i], list[j]);
    return out;
}

/// Expected ProdSI2Vec pair count for one ordered product pair.
inline std::size_t prodsi_pair_count(std::size_t s_centre, std::size_t s_context) {
    return 1 + s_centre + s_context + s_centre * s_context;
}

/// Central finite difference d f / d x_i at the given coordinate.
inline double central_diff(const std::function<double()>& f, double& x, double h = 1e-6) {
    const double x0 = x;
    x = x0 + h;
    double fp = f();
    x = x0 - h;
    double fm = f();
    x = x0;
    return (fp - fm) / (2.0 * h);
}

inline double rel_err(double a, double b) {
    double denom = std::max({std::fabs(a), std::fabs(b), 1e-8});
    return std::fabs(a - b) / denom;
}

/// Mean full-softmax log-likelihood of (centre, context) pairs under input
/// vectors `in` and output vectors `out` — Eq.-5-style idealized objective,
/// tractable only for tiny vocabularies.
inline double full_softmax_loglik(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const std::vector<std::vector<double>>& in, const std::vector<std::vector<double>>& out) {
    double total = 0.0;
    for (const auto& [c, x] : pairs) {
        double max_dot = -1e300;
        std::vector<double> dots(out.size());
        for (std::size_t y = 0; y < out.size(); ++y) {
            double d = 0;
            for (std::size_t k = 0; k < in[c].size(); ++k) d += in[c][k] * out[y][k];
            dots[y] = d;
            max_dot = std::max(max_dot, d);
        }
        double z = 0.0;
        for (double d : dots) z += std::exp(d - max_dot);
        total += dots[x] - max_dot - std::log(z);
    }
    return total / static_cast<double>(pairs.size());
}

} // namespace oracles
