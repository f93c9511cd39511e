#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embkit/mf.hpp"
#include "embkit/types.hpp"

namespace embkit::graph {

/// Event weights normalizing clicks, bags, and purchases by relative
/// frequency over the configured event window: I_click = 1,
/// I_bag = sum(clicks)/sum(bags), I_purchase = sum(clicks)/sum(purchases).
struct ImportanceWeights {
    double click = 1.0;
    double bag = 1.0;
    double purchase = 1.0;

    double of(EventType t) const {
        switch (t) {
            case EventType::click: return click;
            case EventType::bag: return bag;
            case EventType::purchase: return purchase;
        }
        return 1.0;
    }
};

/// Highest-priority event type for one (user, product) pair:
/// click < bag < purchase.
EventType event_priority_reduce(std::span<const EventType> types);

/// Throws DegenerateInputError when any event type is missing from the window.
ImportanceWeights compute_importance(const std::vector<Event>& events);

/// One entry per interacting (user, product) pair, valued at the importance
/// of the pair's priority-reduced event type.
mf::InteractionMatrix build_weighted_matrix(const std::vector<Event>& events,
                                            const ImportanceWeights& weights);

/// Weighted undirected product graph. Neighbor lists are sorted by node index;
/// weights are nonnegative; no self-loops.
class ItemGraph {
public:
    ItemGraph(std::vector<std::string> nodes,
              std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<std::string>& nodes() const { return nodes_; }
    std::span<const std::pair<std::uint32_t, double>> neighbors(std::size_t v) const {
        return adjacency_[v];
    }
    /// Prefix sums of neighbor weights, for proportional transition sampling.
    std::span<const double> neighbor_cumweights(std::size_t v) const { return cumweights_[v]; }

    /// TSV edge list (src, dst, weight), each undirected edge once, ordered.
    void save_edges_tsv(const std::string& path) const;

private:
    std::vector<std::string> nodes_;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency_;
    std::vector<std::vector<double>> cumweights_;
};

struct ItemGraphConfig {
    std::size_t rank = 100;   // NMF rank; one knob with the embedding dimension
    std::size_t top_k = 20;   // heaviest edges kept per node before symmetrization
    mf::NmfConfig nmf;
};

/// NMF on the weighted user-product matrix, then edges from pairwise dot
/// products of the product factors: per node keep the top_k heaviest edges,
/// then symmetrize by union. Zero-weight edges are dropped, so products with
/// no interactions end up isolated.
ItemGraph build_item_graph(const mf::InteractionMatrix& weighted, const ItemGraphConfig& config);

struct DeepWalkConfig {
    std::size_t walks_per_node = 10;
    std::size_t walk_length = 40; // nodes per walk
    std::uint64_t seed = 1;
};

/// From every node, walks_per_node walks; the next node is sampled
/// proportionally to edge weight. Isolated nodes yield length-1 walks.
/// Per-walk seeds are derived from (seed, node, walk index), so output is
/// deterministic and independent of scheduling.
std::vector<std::vector<std::string>> deepwalk_walks(const ItemGraph& graph,
                                                     const DeepWalkConfig& config);

/// One walk per line, space-separated tokens ("simulated sessions").
void save_walks(const std::vector<std::vector<std::string>>& walks, const std::string& path);

} // namespace embkit::graph
