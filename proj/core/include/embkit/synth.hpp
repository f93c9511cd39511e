#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "embkit/embedding.hpp"
#include "embkit/types.hpp"

namespace embkit::synth {

/// Desk-scale world shape. Event targets keep the click > bag > purchase
/// ordering of production traffic, scaled down; the popularity skew is
/// calibrated so that at defaults the top 20% of products draw ~80% of
/// clicks.
struct WorldConfig {
    std::size_t n_products = 2000;
    std::size_t n_users = 5000;
    std::size_t n_styles = 4; // latent clusters

    double clicks_per_user = 30.0;
    double bags_per_user = 8.0;
    double purchases_per_user = 4.0;

    double popularity_skew = 1.05;  // zipf exponent over product ranks
    double noise_click_rate = 0.10; // off-cluster clicks inside a session
    double user_affinity = 0.85;    // P(session stays in the user's primary style)

    int brands_per_cluster = 2;
    double brand_purity = 0.90;     // P(brand drawn from the cluster pool)
    double priceband_purity = 0.85;
    double color_affinity = 0.30;   // weak cluster-color correlation
    double si_missing_rate = 0.02;  // chance an optional SI key is absent

    /// Each product carries a 2-d latent visual style inside its cluster;
    /// session clicks concentrate near the session's style point, so visual
    /// similarity genuinely contributes to clicked/purchased similarity.
    double style_locality = 0.5;    // click-sampling bandwidth over style space
    double style_jitter = 0.25;     // session style spread around the user anchor

    double return_base_rate = 0.30;
    double return_user_sd = 1.0;    // user return-propensity spread
    double return_cluster_sd = 1.0; // cluster-level product return offsets
    double return_product_sd = 0.3;
    double return_price_coef = 0.5;
    double return_noise_sd = 0.5;

    int image_dim = 100;            // must match the tables unified with
    double image_noise = 0.25;      // per-component jitter
    double image_style_coef = 0.8;  // weight of the latent style in image vectors

    std::uint64_t seed = 42;

    void validate() const;
};

/// One cart item (a purchase) with its planted return label.
struct CartObservation {
    std::string user_id;
    std::string product_id;
    std::string session_id;
    std::int64_t ts = 0;
    bool returned = false;
};

struct GroundTruth {
    /// Catalog order: (product id, cluster id) and planted return score.
    std::vector<std::pair<std::string, int>> product_cluster;
    std::vector<double> product_return_score;
    std::vector<std::pair<std::string, double>> user_propensity;
    std::vector<CartObservation> carts;

    std::unordered_map<std::string, int> cluster_index() const;
};

struct World {
    std::vector<ProductRecord> catalog;
    std::vector<Event> events;
    GroundTruth truth;
    EmbeddingTable images; // cluster-informative vectors, store-format ready
    std::vector<std::string> warnings;
};

/// Deterministic under config.seed: two runs produce identical worlds.
World gen_world(const WorldConfig& config);

void write_catalog_jsonl(const std::vector<ProductRecord>& records, const std::string& path);
void write_events_jsonl(const std::vector<Event>& events, const std::string& path);
void write_ground_truth_jsonl(const GroundTruth& truth, const std::string& path);
GroundTruth read_ground_truth_jsonl(const std::string& path);

} // namespace embkit::synth
