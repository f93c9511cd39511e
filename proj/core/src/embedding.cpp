#include "embkit/embedding.hpp"

#include <algorithm>
#include <cmath>

namespace embkit {

EmbeddingTable::EmbeddingTable(int dimension,
                               std::vector<std::pair<std::string, EmbeddingVector>> entries,
                               Metadata metadata)
    : dimension_(dimension), metadata_(std::move(metadata)) {
    if (dimension <= 0) throw UsageError("embedding dimension must be positive");
    tokens_.reserve(entries.size());
    data_.reserve(entries.size() * static_cast<std::size_t>(dimension));
    norms_.reserve(entries.size());
    index_.reserve(entries.size());
    for (auto& [token, v] : entries) {
        if (token.empty()) throw UsageError("embedding token must be non-empty");
        if (v.size() != static_cast<std::size_t>(dimension))
            throw UsageError("vector for '" + token + "' has length " +
                             std::to_string(v.size()) + ", table dimension is " +
                             std::to_string(dimension));
        double sq = 0.0;
        for (float x : v) {
            if (!std::isfinite(x))
                throw UsageError("non-finite component in vector for '" + token + "'");
            sq += static_cast<double>(x) * x;
        }
        auto [it, fresh] = index_.emplace(token, tokens_.size());
        if (!fresh) throw UsageError("duplicate token in embedding table: " + token);
        tokens_.push_back(std::move(token));
        data_.insert(data_.end(), v.begin(), v.end());
        norms_.push_back(std::sqrt(sq));
    }
}

bool EmbeddingTable::contains(std::string_view token) const {
    return index_.find(std::string(token)) != index_.end();
}

std::span<const float> EmbeddingTable::vec(std::string_view token) const {
    std::size_t i = index_of(token);
    if (i == npos) throw NotFoundError("token not in embedding table: " + std::string(token));
    return vec_at(i);
}

std::size_t EmbeddingTable::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? npos : it->second;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw UsageError("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw DegenerateInputError("cosine_similarity: zero-norm input");
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

std::vector<Neighbor> top_k_neighbors(const EmbeddingTable& table, std::string_view query,
                                      std::size_t k, const TokenFilter& filter) {
    if (k < 1) throw UsageError("top_k_neighbors: k must be >= 1");
    std::size_t qi = table.index_of(query);
    if (qi == EmbeddingTable::npos)
        throw NotFoundError("top_k_neighbors: unknown query token: " + std::string(query));
    auto q = table.vec_at(qi);
    double qn = table.norm_at(qi);
    if (qn == 0.0)
        throw DegenerateInputError("top_k_neighbors: query vector has zero norm");

    const int d = table.dimension();
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (i == qi) continue;
        const auto& tok = table.tokens()[i];
        if (filter && !filter(tok)) continue;
        double n = table.norm_at(i);
        if (n == 0.0) continue;
        auto v = table.vec_at(i);
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += static_cast<double>(q[j]) * v[j];
        scored.emplace_back(dot / (qn * n), i);
    }

    auto better = [&table](const std::pair<double, std::size_t>& a,
                           const std::pair<double, std::size_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return table.tokens()[a.second] < table.tokens()[b.second];
    };
    std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), better);

    std::vector<Neighbor> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back(Neighbor{table.tokens()[scored[i].second],
                               std::clamp(scored[i].first, -1.0, 1.0)});
    return out;
}

} // namespace embkit
