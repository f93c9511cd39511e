#include "embkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "embkit/rng.hpp"

namespace embkit::eval {

namespace {

/// Median with the usual convention (mean of the two middles on even size).
double median_of(std::vector<double> v) {
    if (v.empty()) throw UsageError("median of empty set");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Indices of product tokens (no '=') in table order.
std::vector<std::size_t> product_indices(const EmbeddingTable& table) {
    std::vector<std::size_t> idx;
    idx.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i)
        if (!is_si_token(table.tokens()[i]) && table.norm_at(i) > 0.0) idx.push_back(i);
    return idx;
}

/// Cosine similarities of one query vector against a candidate index list.
std::vector<double> similarities_to(const EmbeddingTable& table, std::size_t query,
                                    const std::vector<std::size_t>& candidates) {
    const int d = table.dimension();
    auto q = table.vec_at(query);
    double qn = table.norm_at(query);
    std::vector<double> sims(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        auto v = table.vec_at(candidates[c]);
        double dot = 0.0;
        for (int k = 0; k < d; ++k) dot += static_cast<double>(q[k]) * v[k];
        sims[c] = dot / (qn * table.norm_at(candidates[c]));
    }
    return sims;
}

} // namespace

double EvalReport::value(const std::string& series, double x) const {
    for (const ReportRow& r : rows)
        if (r.series == series && r.x == x) return r.value;
    throw NotFoundError("report " + task + ": no row (" + series + ", " + std::to_string(x) + ")");
}

void write_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "task,embedding,x,metric\n";
    char buf[64];
    for (const ReportRow& r : report.rows) {
        out << report.task;
        if (!r.series.empty()) out << ':' << r.series;
        std::snprintf(buf, sizeof(buf), ",%.6g,%.6f\n", r.x, r.value);
        out << ',' << report.embedding << buf;
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Embeddings-to-attributes
// ---------------------------------------------------------------------------

EvalReport attribute_precision_at_k(const EmbeddingTable& table, const Catalog& catalog,
                                    const AttributeTaskConfig& config) {
    if (config.ks.empty()) throw ConfigError("attribute task: no k values");
    EvalReport report;
    report.task = "attributes";
    report.embedding = table.metadata().method;

    // queries: product tokens known to both table and catalog
    std::vector<std::string> candidates;
    for (const std::string& tok : table.tokens())
        if (!is_si_token(tok) && catalog.contains(tok)) candidates.push_back(tok);
    if (candidates.empty()) throw DataError("attribute task: table covers no catalog products");

    Rng rng(Rng::mix(config.seed, 0xa77a));
    deterministic_shuffle(candidates, rng);
    if (candidates.size() > config.sample_size) candidates.resize(config.sample_size);
    std::sort(candidates.begin(), candidates.end());

    const std::size_t k_max = *std::max_element(config.ks.begin(), config.ks.end());
    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
    };
    std::vector<std::vector<Acc>> acc(config.attributes.size(),
                                      std::vector<Acc>(config.ks.size()));
    std::vector<std::size_t> missing_attr(config.attributes.size(), 0);

    for (const std::string& query : candidates) {
        auto neighbors = top_k_neighbors(table, query, k_max, product_token_filter);
        const ProductRecord& qrec = catalog.record(query);
        for (std::size_t a = 0; a < config.attributes.size(); ++a) {
            const auto& qval = qrec.attr(config.attributes[a]);
            if (!qval) {
                ++missing_attr[a];
                continue;
            }
            std::size_t matches = 0, seen = 0, ki = 0;
            std::vector<double> prec_at(config.ks.size(), 0.0);
            for (std::size_t i = 0; i < neighbors.size() && ki < config.ks.size(); ++i) {
                const ProductRecord* nrec = catalog.find(neighbors[i].token);
                if (nrec) {
                    const auto& nval = nrec->attr(config.attributes[a]);
                    if (nval && *nval == *qval) ++matches;
                }
                ++seen;
                while (ki < config.ks.size() && seen == std::min(config.ks[ki], neighbors.size())) {
                    prec_at[ki] = static_cast<double>(matches) / static_cast<double>(seen);
                    ++ki;
                }
            }
            for (std::size_t k = 0; k < config.ks.size(); ++k) {
                acc[a][k].sum += prec_at[k];
                acc[a][k].n += 1;
            }
        }
    }

    for (std::size_t a = 0; a < config.attributes.size(); ++a) {
        std::string attr(si_key_name(config.attributes[a]));
        for (std::size_t k = 0; k < config.ks.size(); ++k) {
            double mean = acc[a][k].n ? acc[a][k].sum / static_cast<double>(acc[a][k].n) : 0.0;
            report.add(attr, static_cast<double>(config.ks[k]), mean);
        }
        if (missing_attr[a] > 0)
            report.count("queries_missing_" + attr, static_cast<double>(missing_attr[a]));
    }
    report.count("queries", static_cast<double>(candidates.size()));
    return report;
}

// ---------------------------------------------------------------------------
// Clicked-purchased similarity
// ---------------------------------------------------------------------------

EvalReport clicked_purchased_rank(const EmbeddingTable& table,
                                  const std::vector<Session>& sessions,
                                  const EmbeddingTable& reference,
                                  const ClickedPurchasedConfig& config) {
    EvalReport report;
    report.task = "clicked_purchased";
    report.embedding = table.metadata().method;

    // distinct purchased products per user, across all provided sessions
    std::unordered_map<std::string, std::unordered_set<std::string>> purchased_by_user;
    for (const Session& s : sessions)
        for (const Event& ev : s.events)
            if (ev.type == EventType::purchase) purchased_by_user[s.user_id].insert(ev.product_id);

    struct Candidate {
        const Session* session;
        std::vector<std::string> clicks; // most recent first
        std::string purchased;
    };
    std::vector<Candidate> candidates;
    std::size_t skipped_no_purchase = 0, skipped_no_clicks = 0, skipped_user_filter = 0;
    for (const Session& s : sessions) {
        std::size_t last_purchase = s.events.size();
        for (std::size_t i = s.events.size(); i-- > 0;) {
            if (s.events[i].type == EventType::purchase) {
                last_purchase = i;
                break;
            }
        }
        if (last_purchase == s.events.size()) {
            ++skipped_no_purchase;
            continue;
        }
        auto uit = purchased_by_user.find(s.user_id);
        if (uit == purchased_by_user.end() ||
            static_cast<int>(uit->second.size()) < config.min_user_purchases) {
            ++skipped_user_filter;
            continue;
        }
        Candidate cand;
        cand.session = &s;
        cand.purchased = s.events[last_purchase].product_id;
        for (std::size_t i = last_purchase; i-- > 0 && cand.clicks.size() < config.window;) {
            if (s.events[i].type == EventType::click) cand.clicks.push_back(s.events[i].product_id);
        }
        if (cand.clicks.empty()) {
            ++skipped_no_clicks;
            continue;
        }
        candidates.push_back(std::move(cand));
    }

    if (config.max_sessions > 0 && candidates.size() > config.max_sessions) {
        Rng rng(Rng::mix(config.seed, 0xc9c9));
        deterministic_shuffle(candidates, rng);
        candidates.resize(config.max_sessions);
    }

    // prune incoherent sessions with the fixed reference table
    std::size_t pruned = 0, reference_skipped = 0;
    std::vector<const Candidate*> kept;
    for (const Candidate& cand : candidates) {
        std::size_t pi = reference.index_of(cand.purchased);
        if (pi == EmbeddingTable::npos || reference.norm_at(pi) == 0.0) {
            ++reference_skipped;
            continue;
        }
        std::vector<double> cos;
        for (const std::string& c : cand.clicks) {
            std::size_t ci = reference.index_of(c);
            if (ci == EmbeddingTable::npos || reference.norm_at(ci) == 0.0) continue;
            cos.push_back(cosine_similarity(reference.vec_at(ci), reference.vec_at(pi)));
        }
        if (cos.empty()) {
            ++reference_skipped;
            continue;
        }
        if (median_of(cos) < config.coherence_threshold) {
            ++pruned;
            continue;
        }
        kept.push_back(&cand);
    }

    // ranks per click position in the table under test
    auto prod_idx = product_indices(table);
    std::vector<std::vector<double>> ranks_per_position(config.window);
    std::size_t target_missing = 0, click_missing = 0;
    for (const Candidate* cand : kept) {
        std::size_t qi = table.index_of(cand->purchased);
        if (qi == EmbeddingTable::npos || table.norm_at(qi) == 0.0) {
            ++target_missing;
            continue;
        }
        std::vector<double> sims = similarities_to(table, qi, prod_idx);
        std::unordered_map<std::string, std::size_t> pos_in_candidates;
        for (std::size_t c = 0; c < prod_idx.size(); ++c)
            pos_in_candidates.emplace(table.tokens()[prod_idx[c]], c);

        for (std::size_t i = 0; i < cand->clicks.size(); ++i) {
            const std::string& clicked = cand->clicks[i];
            if (clicked == cand->purchased) {
                ranks_per_position[i].push_back(1.0);
                continue;
            }
            auto cit = pos_in_candidates.find(clicked);
            if (cit == pos_in_candidates.end()) {
                ++click_missing;
                continue;
            }
            std::size_t ci = cit->second;
            double csim = sims[ci];
            const std::string& ctok = table.tokens()[prod_idx[ci]];
            std::size_t rank = 1;
            for (std::size_t c = 0; c < prod_idx.size(); ++c) {
                if (c == ci) continue;
                const std::string& tok = table.tokens()[prod_idx[c]];
                if (tok == cand->purchased) continue; // query excluded from ordering
                if (sims[c] > csim || (sims[c] == csim && tok < ctok)) ++rank;
            }
            ranks_per_position[i].push_back(static_cast<double>(rank));
        }
    }

    for (std::size_t i = 0; i < config.window; ++i) {
        if (ranks_per_position[i].empty()) continue;
        report.add("", static_cast<double>(i + 1), median_of(ranks_per_position[i]));
    }
    report.count("sessions_with_purchase",
                 static_cast<double>(candidates.size()));
    report.count("sessions_kept", static_cast<double>(kept.size()));
    report.count("sessions_pruned_incoherent", static_cast<double>(pruned));
    report.count("sessions_skipped_reference", static_cast<double>(reference_skipped));
    report.count("sessions_skipped_no_purchase", static_cast<double>(skipped_no_purchase));
    report.count("sessions_skipped_no_clicks", static_cast<double>(skipped_no_clicks));
    report.count("sessions_skipped_user_filter", static_cast<double>(skipped_user_filter));
    report.count("clicks_missing_from_table", static_cast<double>(click_missing));
    report.count("purchases_missing_from_table", static_cast<double>(target_missing));
    return report;
}

// ---------------------------------------------------------------------------
// Sparsity hit ratio
// ---------------------------------------------------------------------------

EvalReport sparse_hit_ratio(const EmbeddingTable& table, const std::vector<Session>& sessions,
                            const std::vector<Event>& events,
                            const SparseHitRatioConfig& config) {
    if (config.ks.empty()) throw ConfigError("sparsity task: no k values");
    EvalReport report;
    report.task = "sparsity_hr";
    report.embedding = table.metadata().method;

    // click counts over the event log
    std::unordered_map<std::string, std::size_t> clicks;
    double total_clicks = 0.0;
    for (const Event& ev : events) {
        if (ev.type == EventType::click) {
            ++clicks[ev.product_id];
            total_clicks += 1.0;
        } else {
            clicks.try_emplace(ev.product_id, 0);
        }
    }
    if (total_clicks == 0.0) throw DegenerateInputError("sparsity task: no click events");

    // ascending-popularity accumulation up to the click-mass quantile
    std::vector<std::pair<std::size_t, std::string>> by_count;
    by_count.reserve(clicks.size());
    for (const auto& [id, n] : clicks) by_count.emplace_back(n, id);
    std::sort(by_count.begin(), by_count.end());
    std::unordered_set<std::string> sparse;
    double cum = 0.0;
    const double budget = config.sparse_quantile * total_clicks;
    for (const auto& [n, id] : by_count) {
        if (cum + static_cast<double>(n) > budget) break;
        cum += static_cast<double>(n);
        sparse.insert(id);
    }
    report.count("sparse_products", static_cast<double>(sparse.size()));

    // queries: sparse clicks with a successor click
    struct Query {
        std::string query;
        std::vector<std::string> targets; // next click, or all later clicks
    };
    std::vector<Query> queries;
    for (const Session& s : sessions) {
        std::vector<const std::string*> session_clicks;
        for (const Event& ev : s.events)
            if (ev.type == EventType::click) session_clicks.push_back(&ev.product_id);
        for (std::size_t t = 0; t + 1 < session_clicks.size(); ++t) {
            if (!sparse.count(*session_clicks[t])) continue;
            Query q;
            q.query = *session_clicks[t];
            if (config.any_later_click) {
                for (std::size_t r = t + 1; r < session_clicks.size(); ++r)
                    q.targets.push_back(*session_clicks[r]);
            } else {
                q.targets.push_back(*session_clicks[t + 1]);
            }
            queries.push_back(std::move(q));
        }
    }
    if (config.max_queries > 0 && queries.size() > config.max_queries) {
        Rng rng(Rng::mix(config.seed, 0x5b5b));
        deterministic_shuffle(queries, rng);
        queries.resize(config.max_queries);
    }

    const std::size_t k_max = *std::max_element(config.ks.begin(), config.ks.end());
    std::unordered_map<std::string, std::vector<std::string>> topk_cache;
    std::vector<double> hits(config.ks.size(), 0.0);
    std::size_t uncovered = 0;
    for (const Query& q : queries) {
        std::size_t qi = table.index_of(q.query);
        if (qi == EmbeddingTable::npos || table.norm_at(qi) == 0.0) {
            ++uncovered; // a table that cannot serve the query scores zero
            continue;
        }
        auto cache_it = topk_cache.find(q.query);
        if (cache_it == topk_cache.end()) {
            auto neighbors = top_k_neighbors(table, q.query, k_max, product_token_filter);
            std::vector<std::string> toks;
            toks.reserve(neighbors.size());
            for (auto& nb : neighbors) toks.push_back(std::move(nb.token));
            cache_it = topk_cache.emplace(q.query, std::move(toks)).first;
        }
        const auto& top = cache_it->second;
        for (std::size_t k = 0; k < config.ks.size(); ++k) {
            std::size_t upto = std::min(config.ks[k], top.size());
            bool hit = false;
            for (std::size_t i = 0; i < upto && !hit; ++i)
                for (const std::string& target : q.targets)
                    if (top[i] == target) {
                        hit = true;
                        break;
                    }
            if (hit) hits[k] += 1.0;
        }
    }

    const double n_queries = static_cast<double>(queries.size());
    for (std::size_t k = 0; k < config.ks.size(); ++k)
        report.add("", static_cast<double>(config.ks[k]),
                   n_queries > 0 ? hits[k] / n_queries : 0.0);
    report.count("queries", n_queries);
    report.count("uncovered_queries", static_cast<double>(uncovered));
    return report;
}

// ---------------------------------------------------------------------------
// Cart return prediction
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kPricebandOrder = {"0-500",     "500-1000", "1000-1500",
                                                  "1500-2000", "2000-2500", "2500-3000",
                                                  "3000+"};

double price_segment(const Catalog& catalog, const std::string& product_id) {
    const ProductRecord* rec = catalog.find(product_id);
    if (!rec) return 0.5;
    const auto& band = rec->attr(SiKey::priceband);
    if (!band) return 0.5;
    auto it = std::find(kPricebandOrder.begin(), kPricebandOrder.end(), *band);
    if (it == kPricebandOrder.end()) return 0.5;
    return static_cast<double>(it - kPricebandOrder.begin()) /
           static_cast<double>(kPricebandOrder.size() - 1);
}

} // namespace

ReturnStats build_return_stats(const std::vector<ReturnRecord>& history, const Catalog& catalog) {
    ReturnStats stats;
    double returns = 0.0;
    std::unordered_map<std::string, std::unordered_set<std::string>> user_orders;
    for (const ReturnRecord& r : history) {
        auto& u = stats.users[r.user_id];
        u.purchases += 1.0;
        u.purchased.push_back(r.product_id);
        user_orders[r.user_id].insert(r.order_id);
        if (r.returned) {
            u.returned_qty += 1.0;
            u.returned_revenue += price_segment(catalog, r.product_id);
            returns += 1.0;
        }
        auto& p = stats.product_returns[r.product_id];
        if (r.returned) p.first += 1.0;
        p.second += 1.0;
    }
    for (auto& [user, orders] : user_orders)
        stats.users[user].orders = static_cast<double>(orders.size());
    stats.global_return_rate = history.empty() ? 0.0 : returns / static_cast<double>(history.size());
    return stats;
}

ReturnFeatureResult build_return_features(const std::vector<ReturnRecord>& carts,
                                          const ReturnStats& stats, const Catalog& catalog,
                                          const EmbeddingTable* product_table,
                                          const EmbeddingTable* user_table) {
    ReturnFeatureResult result;
    const int d = product_table ? product_table->dimension() : 0;
    if (product_table && user_table && user_table->dimension() != d)
        throw UsageError("return features: user/product table dimension mismatch");

    // order-level aggregates over the cart set itself
    std::unordered_map<std::string, std::pair<double, double>> order_size_price; // n, sum price
    std::unordered_map<std::string, std::unordered_set<std::string>> order_products;
    for (const ReturnRecord& r : carts) {
        std::string key = r.user_id + '\x1f' + r.order_id;
        auto& sp = order_size_price[key];
        sp.first += 1.0;
        sp.second += price_segment(catalog, r.product_id);
        order_products[key].insert(r.product_id);
    }

    for (const ReturnRecord& r : carts) {
        if (product_table && !product_table->contains(r.product_id)) {
            ++result.dropped_unknown_product;
            continue;
        }
        ReturnExample ex;
        ex.label = r.returned ? 1 : 0;
        auto& f = ex.features;
        f.reserve(10 + 2 * static_cast<std::size_t>(d));

        // group 1: user history
        auto uit = stats.users.find(r.user_id);
        if (uit != stats.users.end()) {
            const auto& u = uit->second;
            f.insert(f.end(), {u.returned_qty, u.returned_revenue, u.orders, u.purchases, 1.0});
        } else {
            f.insert(f.end(), {0.0, 0.0, 0.0, 0.0, 0.0});
        }

        // group 2: product return score (smoothed) + price segment
        double score = stats.global_return_rate;
        if (auto pit = stats.product_returns.find(r.product_id);
            pit != stats.product_returns.end()) {
            score = (pit->second.first + stats.smoothing * stats.global_return_rate) /
                    (pit->second.second + stats.smoothing);
        }
        f.push_back(score);
        f.push_back(price_segment(catalog, r.product_id));

        // group 3: order-level
        std::string key = r.user_id + '\x1f' + r.order_id;
        const auto& sp = order_size_price.at(key);
        f.push_back(sp.first);
        f.push_back(sp.second / sp.first);
        f.push_back(static_cast<double>(order_products.at(key).size()));

        if (product_table) {
            // group 4: product embedding
            auto pv = product_table->vec(r.product_id);
            for (float x : pv) f.push_back(static_cast<double>(x));

            // group 5: user embedding
            std::vector<double> uv(static_cast<std::size_t>(d), 0.0);
            bool have_user = false;
            if (user_table) {
                std::size_t ui = user_table->index_of(r.user_id);
                if (ui != EmbeddingTable::npos) {
                    auto v = user_table->vec_at(ui);
                    for (int k = 0; k < d; ++k) uv[static_cast<std::size_t>(k)] = v[k];
                    have_user = true;
                }
            }
            if (!have_user && uit != stats.users.end()) {
                double n = 0.0;
                for (const std::string& pid : uit->second.purchased) {
                    std::size_t pi = product_table->index_of(pid);
                    if (pi == EmbeddingTable::npos) continue;
                    auto v = product_table->vec_at(pi);
                    for (int k = 0; k < d; ++k) uv[static_cast<std::size_t>(k)] += v[k];
                    n += 1.0;
                }
                if (n > 0)
                    for (double& x : uv) x /= n;
            }
            f.insert(f.end(), uv.begin(), uv.end());
        }
        result.examples.push_back(std::move(ex));
    }
    return result;
}

ReturnPredictionResult return_predict_train_eval(const std::vector<ReturnExample>& examples,
                                                 double train_fraction,
                                                 const LogRegConfig& config) {
    if (examples.empty()) throw DegenerateInputError("return prediction: no examples");
    if (!(train_fraction > 0.0) || train_fraction >= 1.0)
        throw ConfigError("return prediction: train fraction must be in (0, 1)");
    const std::size_t n = examples.size();
    const std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                             train_fraction * static_cast<double>(n)));
    if (n_train >= n) throw DataError("return prediction: empty test split");
    const std::size_t dim = examples[0].features.size();

    std::size_t train_pos = 0;
    for (std::size_t i = 0; i < n_train; ++i) train_pos += examples[i].label;
    if (train_pos == 0 || train_pos == n_train)
        throw DataError("return prediction: single-class train split");

    // z-score from the train slice
    std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
    for (std::size_t i = 0; i < n_train; ++i)
        for (std::size_t k = 0; k < dim; ++k) mean[k] += examples[i].features[k];
    for (double& m : mean) m /= static_cast<double>(n_train);
    for (std::size_t i = 0; i < n_train; ++i)
        for (std::size_t k = 0; k < dim; ++k) {
            double dmean = examples[i].features[k] - mean[k];
            sd[k] += dmean * dmean;
        }
    for (double& s : sd) {
        s = std::sqrt(s / static_cast<double>(n_train));
        if (s < 1e-12) s = 1.0;
    }
    auto zrow = [&](const ReturnExample& ex, std::vector<double>& out) {
        for (std::size_t k = 0; k < dim; ++k) out[k] = (ex.features[k] - mean[k]) / sd[k];
    };

    std::vector<double> w(dim, 0.0);
    double bias = 0.0;
    std::vector<double> x(dim);
    std::vector<double> grad(dim);
    for (int it = 0; it < config.iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double gbias = 0.0;
        for (std::size_t i = 0; i < n_train; ++i) {
            zrow(examples[i], x);
            double z = bias;
            for (std::size_t k = 0; k < dim; ++k) z += w[k] * x[k];
            double p = 1.0 / (1.0 + std::exp(-z));
            double err = p - static_cast<double>(examples[i].label);
            gbias += err;
            for (std::size_t k = 0; k < dim; ++k) grad[k] += err * x[k];
        }
        double inv_n = 1.0 / static_cast<double>(n_train);
        bias -= config.learning_rate * gbias * inv_n;
        for (std::size_t k = 0; k < dim; ++k)
            w[k] -= config.learning_rate * (grad[k] * inv_n + config.reg * w[k]);
    }

    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = n_train; i < n; ++i) {
        zrow(examples[i], x);
        double z = bias;
        for (std::size_t k = 0; k < dim; ++k) z += w[k] * x[k];
        bool pred = 1.0 / (1.0 + std::exp(-z)) >= config.threshold;
        bool truth = examples[i].label == 1;
        if (pred && truth) ++tp;
        else if (pred && !truth) ++fp;
        else if (!pred && truth) ++fn;
    }

    ReturnPredictionResult result;
    result.n_train = n_train;
    result.n_test = n - n_train;
    if (tp + fp == 0) {
        result.precision = 0.0;
        result.degenerate_precision = true;
    } else {
        result.precision = tp / (tp + fp);
    }
    result.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    result.f1 = result.precision + result.recall > 0
                    ? 2.0 * result.precision * result.recall / (result.precision + result.recall)
                    : 0.0;
    return result;
}

ReturnPredictionResult run_return_prediction(std::vector<ReturnRecord> records,
                                             const Catalog& catalog,
                                             const EmbeddingTable* product_table,
                                             const EmbeddingTable* user_table,
                                             const ReturnTaskConfig& config) {
    if (records.empty()) throw DegenerateInputError("return prediction: no cart records");
    std::stable_sort(records.begin(), records.end(),
                     [](const ReturnRecord& a, const ReturnRecord& b) { return a.ts < b.ts; });
    const std::size_t n_train = std::max<std::size_t>(
        1, static_cast<std::size_t>(config.train_fraction * static_cast<double>(records.size())));
    std::vector<ReturnRecord> history(records.begin(),
                                      records.begin() + static_cast<std::ptrdiff_t>(n_train));
    ReturnStats stats = build_return_stats(history, catalog);

    const EmbeddingTable* pt = config.include_embeddings ? product_table : nullptr;
    const EmbeddingTable* ut = config.include_embeddings ? user_table : nullptr;
    ReturnFeatureResult features = build_return_features(records, stats, catalog, pt, ut);
    // the drop filter may shift the boundary slightly; recompute the fraction
    return return_predict_train_eval(features.examples, config.train_fraction, config.logreg);
}

EvalReport return_prediction_report(const ReturnPredictionResult& result,
                                    const std::string& embedding_name) {
    EvalReport report;
    report.task = "returns";
    report.embedding = embedding_name;
    report.add("precision", 0.0, result.precision);
    report.add("recall", 0.0, result.recall);
    report.add("f1", 0.0, result.f1);
    report.count("train_examples", static_cast<double>(result.n_train));
    report.count("test_examples", static_cast<double>(result.n_test));
    if (result.degenerate_precision) report.count("degenerate_precision", 1.0);
    return report;
}

} // namespace embkit::eval
