#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "embkit/errors.hpp"
#include "embkit/types.hpp"

namespace embkit {

using EmbeddingVector = std::vector<float>;

/// Immutable token -> vector map. Entries keep insertion order so that
/// persistence and neighbor scans are deterministic. Vector norms are
/// precomputed; unlimited concurrent readers are safe.
class EmbeddingTable {
public:
    struct Metadata {
        std::string method;
        std::string config_digest;
    };

    /// Empty placeholder (dimension 0); unusable until assigned a real table.
    EmbeddingTable() = default;

    EmbeddingTable(int dimension, std::vector<std::pair<std::string, EmbeddingVector>> entries,
                   Metadata metadata = {});

    int dimension() const { return dimension_; }
    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }
    const Metadata& metadata() const { return metadata_; }

    bool contains(std::string_view token) const;
    /// Throws NotFoundError for unknown tokens.
    std::span<const float> vec(std::string_view token) const;
    std::span<const float> vec_at(std::size_t i) const {
        return {data_.data() + i * dimension_, static_cast<std::size_t>(dimension_)};
    }
    double norm_at(std::size_t i) const { return norms_[i]; }

    /// Insertion-ordered token list.
    const std::vector<std::string>& tokens() const { return tokens_; }
    /// Index of a token, or npos when absent.
    std::size_t index_of(std::string_view token) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    int dimension_ = 0;
    Metadata metadata_;
    std::vector<std::string> tokens_;
    std::vector<float> data_;    // size() * dimension_, row-major
    std::vector<double> norms_;  // L2 norm per entry
    std::unordered_map<std::string, std::size_t> index_;
};

/// dot(a,b) / (|a| * |b|). Throws UsageError on dimension mismatch and
/// DegenerateInputError on a zero-norm input (an untrained token should fail
/// loudly rather than read as similarity 0).
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct Neighbor {
    std::string token;
    double similarity;
};

using TokenFilter = std::function<bool(std::string_view)>;

/// Top-k tokens by cosine similarity to `query`, query itself excluded,
/// ties broken by ascending token order. `filter`, when set, restricts the
/// candidate set (e.g. products only). Zero-norm candidates are untrained
/// leftovers and are skipped. Throws NotFoundError when the query is absent.
std::vector<Neighbor> top_k_neighbors(const EmbeddingTable& table, std::string_view query,
                                      std::size_t k, const TokenFilter& filter = nullptr);

/// Candidate filter selecting product tokens (everything without '=').
inline bool product_token_filter(std::string_view token) { return !is_si_token(token); }

} // namespace embkit
