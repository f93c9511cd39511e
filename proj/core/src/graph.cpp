#include "embkit/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "embkit/rng.hpp"

namespace embkit::graph {

EventType event_priority_reduce(std::span<const EventType> types) {
    if (types.empty()) throw UsageError("event_priority_reduce: no events for pair");
    EventType best = EventType::click;
    for (EventType t : types)
        if (static_cast<int>(t) > static_cast<int>(best)) best = t;
    return best;
}

ImportanceWeights compute_importance(const std::vector<Event>& events) {
    double clicks = 0, bags = 0, purchases = 0;
    for (const Event& ev : events) {
        switch (ev.type) {
            case EventType::click: ++clicks; break;
            case EventType::bag: ++bags; break;
            case EventType::purchase: ++purchases; break;
        }
    }
    if (clicks == 0) throw DegenerateInputError("importance: no click events in window");
    if (bags == 0) throw DegenerateInputError("importance: no bag events in window");
    if (purchases == 0) throw DegenerateInputError("importance: no purchase events in window");
    return ImportanceWeights{1.0, clicks / bags, clicks / purchases};
}

mf::InteractionMatrix build_weighted_matrix(const std::vector<Event>& events,
                                            const ImportanceWeights& weights) {
    // priority-reduce each (user, product) pair, first-appearance order
    std::unordered_map<std::string, std::size_t> pair_index;
    std::vector<std::pair<std::pair<std::string, std::string>, EventType>> reduced;
    for (const Event& ev : events) {
        std::string key = ev.user_id + '\x1f' + ev.product_id;
        auto [it, fresh] = pair_index.try_emplace(std::move(key), reduced.size());
        if (fresh) {
            reduced.push_back({{ev.user_id, ev.product_id}, ev.type});
        } else {
            EventType& cur = reduced[it->second].second;
            if (static_cast<int>(ev.type) > static_cast<int>(cur)) cur = ev.type;
        }
    }
    std::vector<std::pair<std::pair<std::string, std::string>, double>> triples;
    triples.reserve(reduced.size());
    for (auto& [ids, type] : reduced) triples.push_back({ids, weights.of(type)});
    return mf::InteractionMatrix::from_triples(triples);
}

ItemGraph::ItemGraph(std::vector<std::string> nodes,
                     std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency)
    : nodes_(std::move(nodes)), adjacency_(std::move(adjacency)) {
    if (adjacency_.size() != nodes_.size())
        throw UsageError("ItemGraph: adjacency size does not match node count");
    cumweights_.resize(adjacency_.size());
    for (std::size_t v = 0; v < adjacency_.size(); ++v) {
        auto& adj = adjacency_[v];
        std::sort(adj.begin(), adj.end());
        double acc = 0.0;
        cumweights_[v].reserve(adj.size());
        for (auto& [u, w] : adj) {
            if (w < 0.0) throw UsageError("ItemGraph: negative edge weight");
            if (u == v) throw UsageError("ItemGraph: self-loop on node " + nodes_[v]);
            acc += w;
            cumweights_[v].push_back(acc);
        }
    }
}

void ItemGraph::save_edges_tsv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    char buf[64];
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        for (const auto& [u, w] : adjacency_[v]) {
            if (u < v) continue; // each undirected edge once
            std::snprintf(buf, sizeof(buf), "%.9g", w);
            out << nodes_[v] << '\t' << nodes_[u] << '\t' << buf << '\n';
        }
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

ItemGraph build_item_graph(const mf::InteractionMatrix& weighted, const ItemGraphConfig& config) {
    mf::NmfResult nmf = mf::nmf_factorize(weighted, config.rank, config.nmf);
    const std::size_t n = weighted.n_cols();
    const std::size_t r = nmf.rank;

    std::vector<std::vector<std::pair<double, std::uint32_t>>> kept(n); // (weight, index)
    std::vector<std::pair<double, std::uint32_t>> scored;
    for (std::size_t i = 0; i < n; ++i) {
        scored.clear();
        auto vi = nmf.col_vec(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            auto vj = nmf.col_vec(j);
            double dot = 0.0;
            for (std::size_t k = 0; k < r; ++k) dot += vi[k] * vj[k];
            if (dot > 0.0) scored.emplace_back(dot, static_cast<std::uint32_t>(j));
        }
        std::size_t take = std::min(config.top_k, scored.size());
        // ties: ascending node index for determinism
        std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first > b.first;
                              return a.second < b.second;
                          });
        kept[i].assign(scored.begin(), scored.begin() + take);
    }

    // symmetrize by union
    std::vector<std::unordered_map<std::uint32_t, double>> merged(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [weight, j] : kept[i]) {
            merged[i][j] = weight;
            merged[j][static_cast<std::uint32_t>(i)] = weight;
        }
    }
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency(n);
    for (std::size_t i = 0; i < n; ++i)
        adjacency[i].assign(merged[i].begin(), merged[i].end());
    return ItemGraph(weighted.col_ids(), std::move(adjacency));
}

std::vector<std::vector<std::string>> deepwalk_walks(const ItemGraph& graph,
                                                     const DeepWalkConfig& config) {
    if (graph.size() == 0) throw DegenerateInputError("deepwalk: empty graph");
    if (config.walk_length < 1) throw ConfigError("deepwalk: walk_length must be >= 1");
    std::vector<std::vector<std::string>> walks;
    walks.reserve(graph.size() * config.walks_per_node);
    for (std::size_t v = 0; v < graph.size(); ++v) {
        for (std::size_t w = 0; w < config.walks_per_node; ++w) {
            Rng rng(Rng::mix(config.seed, v, w));
            std::vector<std::string> walk;
            walk.reserve(config.walk_length);
            std::size_t cur = v;
            walk.push_back(graph.nodes()[cur]);
            while (walk.size() < config.walk_length) {
                auto neigh = graph.neighbors(cur);
                if (neigh.empty()) break; // isolated start yields a length-1 walk
                auto cum = graph.neighbor_cumweights(cur);
                double total = cum.back();
                if (total <= 0.0) break; // all-zero weights: nowhere to go
                double u = rng.uniform() * total;
                auto it = std::upper_bound(cum.begin(), cum.end(), u);
                if (it == cum.end()) --it;
                cur = neigh[static_cast<std::size_t>(it - cum.begin())].first;
                walk.push_back(graph.nodes()[cur]);
            }
            walks.push_back(std::move(walk));
        }
    }
    return walks;
}

void save_walks(const std::vector<std::vector<std::string>>& walks, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const auto& walk : walks) {
        for (std::size_t i = 0; i < walk.size(); ++i) {
            if (i > 0) out << ' ';
            out << walk[i];
        }
        out << '\n';
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

} // namespace embkit::graph
