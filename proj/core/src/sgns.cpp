#include "embkit/sgns.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace embkit::sgns {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
        return std::hash<std::string_view>{}(s);
    }
};
using TokenIndex = std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>>;

/// SI token cache for the lists' products; products absent from the catalog
/// get an empty entry.
std::unordered_map<std::string, std::vector<std::string>> build_si_cache(
    const std::vector<std::vector<std::string>>& lists, const Catalog& catalog) {
    std::unordered_map<std::string, std::vector<std::string>> cache;
    for (const auto& list : lists) {
        for (const auto& token : list) {
            if (cache.count(token)) continue;
            std::vector<std::string> tokens;
            if (const ProductRecord* rec = catalog.find(token)) {
                for (const auto& si : rec->si_tokens()) tokens.push_back(si.canonical());
            }
            cache.emplace(token, std::move(tokens));
        }
    }
    return cache;
}

/// Iterates ordered (centre index, context index) pairs of one list and calls
/// fn(centre_pos, context_pos). window = 0 means all ordered index pairs.
template <typename Fn>
void for_each_index_pair(std::size_t n, int window, Fn&& fn) {
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t lo = 0, hi = n;
        if (window > 0) {
            std::size_t w = static_cast<std::size_t>(window);
            lo = c > w ? c - w : 0;
            hi = std::min(n, c + w + 1);
        }
        for (std::size_t x = lo; x < hi; ++x) {
            if (x == c) continue;
            fn(c, x);
        }
    }
}

} // namespace

void SgnsConfig::validate() const {
    if (dimension < 1) throw ConfigError("sgns: dimension must be >= 1");
    if (negatives < 1) throw ConfigError("sgns: negatives must be >= 1");
    if (!(unigram_exponent > 0.0) || unigram_exponent > 1.0)
        throw ConfigError("sgns: unigram exponent must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("sgns: learning rate must be positive");
    if (epochs < 1) throw ConfigError("sgns: epochs must be >= 1");
}

PairGenStats gen_pairs_prod2vec(const std::vector<std::vector<std::string>>& lists,
                                const PairSink& sink, int window) {
    PairGenStats stats;
    for (const auto& list : lists) {
        if (list.size() < 2) {
            ++stats.skipped_singletons;
            continue;
        }
        for_each_index_pair(list.size(), window, [&](std::size_t c, std::size_t x) {
            sink(list[c], list[x]);
            ++stats.pairs;
        });
    }
    return stats;
}

PairGenStats gen_pairs_prodsi2vec(const std::vector<std::vector<std::string>>& lists,
                                  const Catalog& catalog, const PairSink& sink, int window) {
    PairGenStats stats;
    auto si_cache = build_si_cache(lists, catalog);
    for (const auto& list : lists) {
        if (list.size() < 2) {
            ++stats.skipped_singletons;
            continue;
        }
        for_each_index_pair(list.size(), window, [&](std::size_t c, std::size_t x) {
            const std::string& centre = list[c];
            const std::string& context = list[x];
            const auto& si_c = si_cache.at(centre);
            const auto& si_x = si_cache.at(context);
            sink(centre, context);
            stats.pairs += 1;
            for (const auto& s : si_c) sink(centre, s);
            for (const auto& s : si_x) sink(centre, s);
            stats.pairs += si_c.size() + si_x.size();
            for (const auto& a : si_c)
                for (const auto& b : si_x) sink(a, b);
            stats.pairs += si_c.size() * si_x.size();
        });
    }
    return stats;
}

PairSource prod2vec_source(const std::vector<std::vector<std::string>>& lists, int window) {
    return PairSource(
        [&lists, window](const PairSink& sink) { return gen_pairs_prod2vec(lists, sink, window); });
}

PairSource prodsi2vec_source(const std::vector<std::vector<std::string>>& lists,
                             const Catalog& catalog, int window) {
    return PairSource([&lists, &catalog, window](const PairSink& sink) {
        return gen_pairs_prodsi2vec(lists, catalog, sink, window);
    });
}

PairGenStats dump_pairs_tsv(const PairSource& source, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    PairGenStats stats = source.for_each(
        [&out](std::string_view c, std::string_view x) { out << c << '\t' << x << '\n'; });
    out.close();
    if (!out) throw DataError("write failed: " + path);
    return stats;
}

// ---------------------------------------------------------------------------
// UnigramSampler
// ---------------------------------------------------------------------------

UnigramSampler::UnigramSampler(std::vector<std::pair<std::string, double>> counts,
                               double exponent) {
    if (counts.empty()) throw DegenerateInputError("unigram sampler: empty counts");
    tokens_.reserve(counts.size());
    cumulative_.reserve(counts.size());
    double acc = 0.0;
    for (auto& [token, count] : counts) {
        if (count < 0.0) throw UsageError("unigram sampler: negative count for " + token);
        acc += std::pow(count, exponent);
        tokens_.push_back(std::move(token));
        cumulative_.push_back(acc);
    }
    if (acc <= 0.0) throw DegenerateInputError("unigram sampler: all counts are zero");
}

std::size_t UnigramSampler::sample_index(Rng& rng) const {
    double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

// ---------------------------------------------------------------------------
// Per-pair loss and gradient
// ---------------------------------------------------------------------------

double sgns_pair_objective(std::span<const double> centre_in, std::span<const double> context_out,
                           const std::vector<std::vector<double>>& negatives_out) {
    const std::size_t d = centre_in.size();
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += centre_in[k] * context_out[k];
    double obj = std::log(sigmoid(dot));
    for (const auto& neg : negatives_out) {
        double nd = 0.0;
        for (std::size_t k = 0; k < d; ++k) nd += centre_in[k] * neg[k];
        obj += std::log(sigmoid(-nd));
    }
    return obj;
}

SgnsPairGrad sgns_pair_gradient(std::span<const double> centre_in,
                                std::span<const double> context_out,
                                const std::vector<std::vector<double>>& negatives_out) {
    const std::size_t d = centre_in.size();
    SgnsPairGrad g;
    g.d_centre.assign(d, 0.0);
    g.d_context.assign(d, 0.0);
    g.d_negatives.resize(negatives_out.size());

    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += centre_in[k] * context_out[k];
    double pos = sigmoid(-dot); // d/d(dot) log(sigmoid(dot))
    for (std::size_t k = 0; k < d; ++k) {
        g.d_centre[k] += pos * context_out[k];
        g.d_context[k] = pos * centre_in[k];
    }
    for (std::size_t n = 0; n < negatives_out.size(); ++n) {
        const auto& neg = negatives_out[n];
        double nd = 0.0;
        for (std::size_t k = 0; k < d; ++k) nd += centre_in[k] * neg[k];
        double coef = -sigmoid(nd); // d/d(nd) log(sigmoid(-nd))
        g.d_negatives[n].assign(d, 0.0);
        for (std::size_t k = 0; k < d; ++k) {
            g.d_centre[k] += coef * neg[k];
            g.d_negatives[n][k] = coef * centre_in[k];
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

SgnsTrainResult sgns_train(const PairSource& pairs, const SgnsConfig& config,
                           EmbeddingTable::Metadata metadata) {
    config.validate();
    const int d = config.dimension;

    // pass 1: vocabulary in first-appearance order + occurrence counts
    std::vector<std::string> vocab;
    TokenIndex index;
    std::vector<double> counts;
    std::size_t total_pairs = 0;
    auto intern = [&](std::string_view tok) {
        auto it = index.find(tok);
        if (it == index.end()) {
            it = index.emplace(std::string(tok), static_cast<std::uint32_t>(vocab.size())).first;
            vocab.emplace_back(tok);
            counts.push_back(0.0);
        }
        counts[it->second] += 1.0;
        return it->second;
    };
    PairGenStats stats = pairs.for_each([&](std::string_view c, std::string_view x) {
        intern(c);
        intern(x);
        ++total_pairs;
    });
    if (total_pairs == 0) throw DegenerateInputError("sgns: empty pair stream");

    std::vector<std::pair<std::string, double>> sampler_counts;
    sampler_counts.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) sampler_counts.emplace_back(vocab[i], counts[i]);
    UnigramSampler sampler(std::move(sampler_counts), config.unigram_exponent);

    const std::size_t V = vocab.size();
    std::vector<float> syn0(V * d), syn1(V * d, 0.0f);
    Rng rng(Rng::mix(config.seed, 0x53474e53ULL)); // "SGNS"
    for (std::size_t i = 0; i < syn0.size(); ++i)
        syn0[i] = static_cast<float>((rng.uniform() - 0.5) / d);

    const double lr0 = config.learning_rate;
    const double lr_min = lr0 / 100.0;
    const double total_steps =
        static_cast<double>(total_pairs) * static_cast<double>(config.epochs);

    std::vector<double> loss_trace;
    loss_trace.reserve(config.epochs);

    std::vector<std::uint32_t> negs(config.negatives);
    std::vector<double> grad_c(d);
    std::size_t processed = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        pairs.for_each([&](std::string_view ctok, std::string_view xtok) {
            const std::uint32_t c = index.find(ctok)->second;
            const std::uint32_t x = index.find(xtok)->second;
            double lr = lr0 * (1.0 - static_cast<double>(processed) / (total_steps + 1.0));
            if (lr < lr_min) lr = lr_min;
            ++processed;

            float* vc = syn0.data() + static_cast<std::size_t>(c) * d;
            float* wx = syn1.data() + static_cast<std::size_t>(x) * d;
            for (int n = 0; n < config.negatives; ++n)
                negs[n] = static_cast<std::uint32_t>(sampler.sample_index(rng));

            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += static_cast<double>(vc[k]) * wx[k];
            double pos = sigmoid(-dot);
            loss_sum += std::log(sigmoid(dot));
            for (int k = 0; k < d; ++k) grad_c[k] = pos * wx[k];
            for (int k = 0; k < d; ++k)
                wx[k] += static_cast<float>(lr * pos * vc[k]);

            for (int n = 0; n < config.negatives; ++n) {
                float* wn = syn1.data() + static_cast<std::size_t>(negs[n]) * d;
                double nd = 0.0;
                for (int k = 0; k < d; ++k) nd += static_cast<double>(vc[k]) * wn[k];
                double coef = -sigmoid(nd);
                loss_sum += std::log(sigmoid(-nd));
                for (int k = 0; k < d; ++k) grad_c[k] += coef * wn[k];
                for (int k = 0; k < d; ++k)
                    wn[k] += static_cast<float>(lr * coef * vc[k]);
            }
            for (int k = 0; k < d; ++k) vc[k] += static_cast<float>(lr * grad_c[k]);
        });
        loss_trace.push_back(loss_sum / static_cast<double>(total_pairs));
    }

    std::vector<std::pair<std::string, EmbeddingVector>> entries, ctx_entries;
    entries.reserve(V);
    ctx_entries.reserve(V);
    for (std::size_t i = 0; i < V; ++i) {
        entries.emplace_back(vocab[i],
                             EmbeddingVector(syn0.begin() + i * d, syn0.begin() + (i + 1) * d));
        ctx_entries.emplace_back(vocab[i],
                                 EmbeddingVector(syn1.begin() + i * d, syn1.begin() + (i + 1) * d));
    }
    EmbeddingTable::Metadata ctx_meta{metadata.method + "-context", metadata.config_digest};
    return SgnsTrainResult{EmbeddingTable(d, std::move(entries), std::move(metadata)),
                           EmbeddingTable(d, std::move(ctx_entries), std::move(ctx_meta)),
                           std::move(loss_trace), total_pairs, stats.skipped_singletons};
}

} // namespace embkit::sgns
