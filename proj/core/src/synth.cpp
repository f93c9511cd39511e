#include "embkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "embkit/rng.hpp"

namespace embkit::synth {

namespace {

const std::vector<std::string> kPricebands = {"0-500",     "500-1000",  "1000-1500", "1500-2000",
                                              "2000-2500", "2500-3000", "3000+"};
const std::vector<std::string> kColors = {"black", "white", "red",  "blue",
                                          "green", "yellow", "navy", "grey"};
const std::vector<std::string> kFabrics = {"cotton", "polyester", "blended", "linen"};
const std::vector<std::string> kNecks = {"round_neck", "polo_collar", "v-neck", "henley"};
const std::vector<std::string> kPatterns = {"solid", "printed", "striped", "colorblocked"};

std::string padded_id(char prefix, std::size_t i, std::size_t total) {
    int width = 1;
    for (std::size_t t = total > 0 ? total - 1 : 0; t >= 10; t /= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, i);
    return std::string(buf);
}

/// Cumulative-weight sampler over a fixed candidate set.
class WeightedPicker {
public:
    WeightedPicker() = default;
    WeightedPicker(std::vector<std::uint32_t> items, const std::vector<double>& weight_of_item)
        : items_(std::move(items)) {
        cum_.reserve(items_.size());
        double acc = 0.0;
        for (std::uint32_t it : items_) {
            acc += weight_of_item[it];
            cum_.push_back(acc);
        }
    }
    bool empty() const { return items_.empty(); }
    std::uint32_t pick(Rng& rng) const {
        double u = rng.uniform() * cum_.back();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        if (it == cum_.end()) --it;
        return items_[static_cast<std::size_t>(it - cum_.begin())];
    }

private:
    std::vector<std::uint32_t> items_;
    std::vector<double> cum_;
};

} // namespace

void WorldConfig::validate() const {
    if (n_products == 0 || n_users == 0 || n_styles == 0)
        throw ConfigError("synth: product/user/style counts must be positive");
    if (clicks_per_user <= 0 || bags_per_user <= 0 || purchases_per_user <= 0)
        throw ConfigError("synth: per-user event targets must be positive");
    if (purchases_per_user > bags_per_user)
        throw ConfigError("synth: purchases per user exceed bags per user");
    if (bags_per_user > clicks_per_user)
        throw ConfigError("synth: bags per user exceed clicks per user");
    if (popularity_skew < 0) throw ConfigError("synth: popularity skew must be >= 0");
    if (return_base_rate <= 0.0 || return_base_rate >= 1.0)
        throw ConfigError("synth: return base rate must be in (0, 1)");
    if (image_dim < 1) throw ConfigError("synth: image dimension must be >= 1");
    if (brands_per_cluster < 1) throw ConfigError("synth: brands_per_cluster must be >= 1");
    if (n_styles > n_products)
        throw ConfigError("synth: more style clusters than products");
}

std::unordered_map<std::string, int> GroundTruth::cluster_index() const {
    std::unordered_map<std::string, int> idx;
    idx.reserve(product_cluster.size());
    for (const auto& [id, c] : product_cluster) idx.emplace(id, c);
    return idx;
}

World gen_world(const WorldConfig& config) {
    config.validate();
    Rng rng(config.seed);
    World world;
    if (config.n_styles == 1)
        world.warnings.push_back(
            "n_styles=1: inter-cluster similarity checks are vacuous");

    const std::size_t P = config.n_products;
    const std::size_t U = config.n_users;
    const std::size_t S = config.n_styles;

    // ---- products: clusters, popularity, side information -----------------
    std::vector<int> cluster(P);
    for (std::size_t i = 0; i < P; ++i) cluster[i] = static_cast<int>(i % S);

    // popularity rank is a random permutation so the head spreads over clusters
    std::vector<std::uint32_t> rank(P);
    std::iota(rank.begin(), rank.end(), 0);
    deterministic_shuffle(rank, rng);
    std::vector<double> weight(P);
    for (std::size_t i = 0; i < P; ++i)
        weight[i] = std::pow(static_cast<double>(rank[i]) + 1.0, -config.popularity_skew);

    std::vector<std::string> brands(S * static_cast<std::size_t>(config.brands_per_cluster));
    for (std::size_t b = 0; b < brands.size(); ++b) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "brand_%02zu", b);
        brands[b] = buf;
    }

    world.catalog.reserve(P);
    for (std::size_t i = 0; i < P; ++i) {
        ProductRecord rec;
        rec.id = padded_id('p', i, P);
        const int c = cluster[i];
        // brand: strongly cluster-correlated
        std::size_t bpc = static_cast<std::size_t>(config.brands_per_cluster);
        std::size_t brand_idx = rng.bernoulli(config.brand_purity)
                                    ? static_cast<std::size_t>(c) * bpc + rng.index(bpc)
                                    : rng.index(brands.size());
        rec.set_attr(SiKey::brand, brands[brand_idx]);
        // priceband: strongly cluster-correlated
        std::size_t home_band = (static_cast<std::size_t>(c) * kPricebands.size()) / S;
        std::size_t band = rng.bernoulli(config.priceband_purity) ? home_band
                                                                  : rng.index(kPricebands.size());
        rec.set_attr(SiKey::priceband, kPricebands[band]);
        // basecolor: weakly cluster-correlated
        std::size_t color = rng.bernoulli(config.color_affinity)
                                ? static_cast<std::size_t>(c) % kColors.size()
                                : rng.index(kColors.size());
        rec.set_attr(SiKey::basecolor, kColors[color]);
        rec.set_attr(SiKey::fabric, kFabrics[rng.index(kFabrics.size())]);
        if (!rng.bernoulli(config.si_missing_rate))
            rec.set_attr(SiKey::neck, kNecks[rng.index(kNecks.size())]);
        if (!rng.bernoulli(config.si_missing_rate))
            rec.set_attr(SiKey::pattern, kPatterns[rng.index(kPatterns.size())]);
        world.catalog.push_back(std::move(rec));
    }

    // latent 2-d visual style inside each cluster
    std::vector<std::array<double, 2>> style(P);
    for (std::size_t i = 0; i < P; ++i)
        style[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

    // per-cluster and global popularity pickers
    std::vector<WeightedPicker> cluster_picker(S);
    {
        std::vector<std::vector<std::uint32_t>> members(S);
        for (std::size_t i = 0; i < P; ++i)
            members[static_cast<std::size_t>(cluster[i])].push_back(
                static_cast<std::uint32_t>(i));
        for (std::size_t s = 0; s < S; ++s)
            cluster_picker[s] = WeightedPicker(std::move(members[s]), weight);
    }
    std::vector<std::uint32_t> all_products(P);
    std::iota(all_products.begin(), all_products.end(), 0);
    WeightedPicker global_picker(std::move(all_products), weight);

    // ---- users and sessions ----------------------------------------------
    const double p_bag = config.bags_per_user / config.clicks_per_user;
    const double p_purchase = config.purchases_per_user / config.bags_per_user;

    for (std::size_t u = 0; u < U; ++u) {
        std::string user_id = padded_id('u', u, U);
        std::size_t primary = rng.index(S);
        // per-user click budget, +-25% around the target
        long remaining =
            std::lround(config.clicks_per_user * (0.75 + 0.5 * rng.uniform()));
        if (remaining < 1) remaining = 1;
        std::int64_t t = static_cast<std::int64_t>(u) * 1000000;
        std::size_t session_no = 0;
        while (remaining > 0) {
            long len = static_cast<long>(8 + rng.index(11)); // 8..18 clicks
            if (len > remaining) len = remaining;
            remaining -= len;
            std::string session_id = user_id + "_s" + std::to_string(session_no++);
            std::size_t style = primary;
            if (S > 1 && !rng.bernoulli(config.user_affinity)) {
                std::size_t other = rng.index(S - 1);
                style = other >= primary ? other + 1 : other;
            }
            for (long k = 0; k < len; ++k) {
                t += 10 + static_cast<std::int64_t>(rng.index(50));
                std::uint32_t prod = rng.bernoulli(config.noise_click_rate)
                                         ? global_picker.pick(rng)
                                         : cluster_picker[style].pick(rng);
                const std::string& pid = world.catalog[prod].id;
                world.events.push_back(Event{user_id, pid, EventType::click, session_id, t, {}});
                if (rng.bernoulli(p_bag)) {
                    t += 1 + static_cast<std::int64_t>(rng.index(10));
                    world.events.push_back(Event{user_id, pid, EventType::bag, session_id, t, {}});
                    if (rng.bernoulli(p_purchase)) {
                        t += 1 + static_cast<std::int64_t>(rng.index(10));
                        world.events.push_back(
                            Event{user_id, pid, EventType::purchase, session_id, t, {}});
                    }
                }
            }
        }
    }

    // ---- ground truth: clusters, return model, carts ----------------------
    GroundTruth& truth = world.truth;
    truth.product_cluster.reserve(P);
    truth.product_return_score.reserve(P);
    std::vector<double> cluster_offset(S);
    for (std::size_t s = 0; s < S; ++s) cluster_offset[s] = rng.normal(0.0, config.return_cluster_sd);
    for (std::size_t i = 0; i < P; ++i) {
        truth.product_cluster.emplace_back(world.catalog[i].id, cluster[i]);
        truth.product_return_score.push_back(
            cluster_offset[static_cast<std::size_t>(cluster[i])] +
            rng.normal(0.0, config.return_product_sd));
    }
    std::unordered_map<std::string, double> user_prop;
    truth.user_propensity.reserve(U);
    for (std::size_t u = 0; u < U; ++u) {
        std::string user_id = padded_id('u', u, U);
        double prop = rng.normal(0.0, config.return_user_sd);
        user_prop.emplace(user_id, prop);
        truth.user_propensity.emplace_back(std::move(user_id), prop);
    }

    std::unordered_map<std::string, std::size_t> product_index;
    for (std::size_t i = 0; i < P; ++i) product_index.emplace(world.catalog[i].id, i);

    std::vector<double> cart_z;
    for (const Event& ev : world.events) {
        if (ev.type != EventType::purchase) continue;
        std::size_t pi = product_index.at(ev.product_id);
        const auto& band = world.catalog[pi].attr(SiKey::priceband);
        double band_idx = 3.0;
        if (band) {
            auto it = std::find(kPricebands.begin(), kPricebands.end(), *band);
            if (it != kPricebands.end())
                band_idx = static_cast<double>(it - kPricebands.begin());
        }
        double z = user_prop.at(ev.user_id) + truth.product_return_score[pi] +
                   config.return_price_coef * (band_idx - 3.0) / 3.0 +
                   rng.normal(0.0, config.return_noise_sd);
        cart_z.push_back(z);
        truth.carts.push_back(CartObservation{ev.user_id, ev.product_id, ev.session_id, ev.ts, false});
    }
    // calibrate the intercept so the mean return probability hits the target
    if (!cart_z.empty()) {
        double lo = -30.0, hi = 30.0;
        auto mean_prob = [&](double b) {
            double acc = 0.0;
            for (double z : cart_z) acc += 1.0 / (1.0 + std::exp(-(z + b)));
            return acc / static_cast<double>(cart_z.size());
        };
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            (mean_prob(mid) < config.return_base_rate ? lo : hi) = mid;
        }
        double intercept = 0.5 * (lo + hi);
        for (std::size_t i = 0; i < truth.carts.size(); ++i) {
            double p = 1.0 / (1.0 + std::exp(-(cart_z[i] + intercept)));
            truth.carts[i].returned = rng.bernoulli(p);
        }
    }

    // ---- image vectors: cluster centroids + jitter -------------------------
    const int d = config.image_dim;
    std::vector<std::vector<double>> centroid(S, std::vector<double>(d));
    for (std::size_t s = 0; s < S; ++s) {
        double norm = 0.0;
        for (int k = 0; k < d; ++k) {
            centroid[s][k] = rng.normal();
            norm += centroid[s][k] * centroid[s][k];
        }
        norm = std::sqrt(norm);
        for (int k = 0; k < d; ++k) centroid[s][k] /= norm;
    }
    std::vector<std::pair<std::string, EmbeddingVector>> image_entries;
    image_entries.reserve(P);
    for (std::size_t i = 0; i < P; ++i) {
        const auto& c = centroid[static_cast<std::size_t>(cluster[i])];
        EmbeddingVector v(d);
        double norm = 0.0;
        for (int k = 0; k < d; ++k) {
            double x = c[k] + config.image_noise * rng.normal();
            v[k] = static_cast<float>(x);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm > 0)
            for (int k = 0; k < d; ++k) v[k] = static_cast<float>(v[k] / norm);
        image_entries.emplace_back(world.catalog[i].id, std::move(v));
    }
    world.images = EmbeddingTable(d, std::move(image_entries), {"IE", ""});

    return world;
}

// ---------------------------------------------------------------------------
// JSONL writers / readers
// ---------------------------------------------------------------------------

void write_catalog_jsonl(const std::vector<ProductRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const ProductRecord& rec : records) {
        nlohmann::ordered_json j;
        j["product_id"] = rec.id;
        for (int k = 0; k < kSiKeyCount; ++k) {
            if (rec.si[k]) j[std::string(kSiKeyNames[k])] = *rec.si[k];
        }
        out << j.dump() << '\n';
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

void write_events_jsonl(const std::vector<Event>& events, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const Event& ev : events) {
        nlohmann::ordered_json j;
        j["user_id"] = ev.user_id;
        j["product_id"] = ev.product_id;
        j["event_type"] = std::string(event_type_name(ev.type));
        j["session_id"] = ev.session_id;
        j["ts"] = ev.ts;
        if (ev.returned) j["returned"] = *ev.returned;
        out << j.dump() << '\n';
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

void write_ground_truth_jsonl(const GroundTruth& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < truth.product_cluster.size(); ++i) {
        nlohmann::ordered_json j;
        j["type"] = "product";
        j["product_id"] = truth.product_cluster[i].first;
        j["cluster"] = truth.product_cluster[i].second;
        j["return_score"] = truth.product_return_score[i];
        out << j.dump() << '\n';
    }
    for (const auto& [user, prop] : truth.user_propensity) {
        nlohmann::ordered_json j;
        j["type"] = "user";
        j["user_id"] = user;
        j["return_propensity"] = prop;
        out << j.dump() << '\n';
    }
    for (const CartObservation& cart : truth.carts) {
        nlohmann::ordered_json j;
        j["type"] = "cart";
        j["user_id"] = cart.user_id;
        j["product_id"] = cart.product_id;
        j["session_id"] = cart.session_id;
        j["ts"] = cart.ts;
        j["returned"] = cart.returned;
        out << j.dump() << '\n';
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

GroundTruth read_ground_truth_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open for reading: " + path);
    GroundTruth truth;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path + " line " + std::to_string(lineno) + ": " + e.what());
        }
        std::string type = j.value("type", "");
        if (type == "product") {
            truth.product_cluster.emplace_back(j.at("product_id").get<std::string>(),
                                               j.at("cluster").get<int>());
            truth.product_return_score.push_back(j.value("return_score", 0.0));
        } else if (type == "user") {
            truth.user_propensity.emplace_back(j.at("user_id").get<std::string>(),
                                               j.value("return_propensity", 0.0));
        } else if (type == "cart") {
            truth.carts.push_back(CartObservation{
                j.at("user_id").get<std::string>(), j.at("product_id").get<std::string>(),
                j.value("session_id", ""), j.value("ts", static_cast<std::int64_t>(0)),
                j.at("returned").get<bool>()});
        } else {
            throw FormatError(path + " line " + std::to_string(lineno) +
                              ": unknown record type '" + type + "'");
        }
    }
    return truth;
}

} // namespace embkit::synth
