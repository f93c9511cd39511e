#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embkit/embedding.hpp"
#include "embkit/rng.hpp"
#include "embkit/types.hpp"

namespace embkit::sgns {

/// One ordered (centre, context) training pair.
struct TrainingPair {
    std::string centre;
    std::string context;
};

struct SgnsConfig {
    int dimension = 100;
    int negatives = 5;            // K negative samples per pair
    double unigram_exponent = 0.75;
    double learning_rate = 0.025; // linearly decayed to learning_rate/100
    int epochs = 5;
    std::uint64_t seed = 1;

    void validate() const;
};

using PairSink = std::function<void(std::string_view centre, std::string_view context)>;

struct PairGenStats {
    std::size_t pairs = 0;
    std::size_t skipped_singletons = 0;
};

/// All ordered centre/context combinations per list: a list of length n emits
/// exactly n*(n-1) pairs (window size one over length-2 tuples). A positive
/// `window` switches to sliding-window generation for long walk sequences.
PairGenStats gen_pairs_prod2vec(const std::vector<std::vector<std::string>>& lists,
                                const PairSink& sink, int window = 0);

/// Prod2Vec pairs plus the SI families: per ordered product pair with s_c SI
/// tokens on the centre and s_x on the context, emits
/// 1 + s_c + s_x + s_c*s_x pairs — (P,P), (P, SI_centre), (P, SI_context),
/// (SI_centre, SI_context). Products missing from the catalog contribute no
/// SI tuples.
PairGenStats gen_pairs_prodsi2vec(const std::vector<std::vector<std::string>>& lists,
                                  const Catalog& catalog, const PairSink& sink, int window = 0);

/// Re-streamable pair supply; the trainer runs one counting pass and one pass
/// per epoch. Captured inputs must outlive the source.
class PairSource {
public:
    explicit PairSource(std::function<PairGenStats(const PairSink&)> gen)
        : gen_(std::move(gen)) {}
    PairGenStats for_each(const PairSink& sink) const { return gen_(sink); }

private:
    std::function<PairGenStats(const PairSink&)> gen_;
};

PairSource prod2vec_source(const std::vector<std::vector<std::string>>& lists, int window = 0);
PairSource prodsi2vec_source(const std::vector<std::vector<std::string>>& lists,
                             const Catalog& catalog, int window = 0);

/// Writes the generated pair stream as TSV (centre \t context), one pair per
/// line, for oracle verification.
PairGenStats dump_pairs_tsv(const PairSource& source, const std::string& path);

// ---------------------------------------------------------------------------
// Negative sampling
// ---------------------------------------------------------------------------

/// Draws tokens with P(token) proportional to count^exponent. Exponent 0 is
/// accepted here (uniform); SgnsConfig validation is stricter.
class UnigramSampler {
public:
    UnigramSampler(std::vector<std::pair<std::string, double>> counts, double exponent);

    std::size_t sample_index(Rng& rng) const;
    const std::string& sample(Rng& rng) const { return tokens_[sample_index(rng)]; }
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::vector<double> cumulative_;
};

// ---------------------------------------------------------------------------
// Per-pair loss, double precision (also the finite-difference target)
// ---------------------------------------------------------------------------

/// log(sigmoid(v_c . w_x)) + sum_n log(sigmoid(-v_c . w_n))
double sgns_pair_objective(std::span<const double> centre_in, std::span<const double> context_out,
                           const std::vector<std::vector<double>>& negatives_out);

struct SgnsPairGrad {
    std::vector<double> d_centre;
    std::vector<double> d_context;
    std::vector<std::vector<double>> d_negatives;
};
SgnsPairGrad sgns_pair_gradient(std::span<const double> centre_in,
                                std::span<const double> context_out,
                                const std::vector<std::vector<double>>& negatives_out);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct SgnsTrainResult {
    EmbeddingTable table;            // input (centre) vectors: the export
    EmbeddingTable context_table;    // output vectors, kept for diagnostics/oracles
    std::vector<double> loss_trace;  // mean per-pair objective per epoch
    std::size_t total_pairs = 0;
    std::size_t skipped_singletons = 0;
};

/// Skip-gram with negative sampling over the pair stream. Maintains input and
/// output vector tables; negatives are drawn from the pair stream's token
/// occurrence counts raised to the unigram exponent (negatives may collide
/// with the centre or context; no resampling). Exports the input vectors.
/// Deterministic under config.seed. Empty stream is an error.
SgnsTrainResult sgns_train(const PairSource& pairs, const SgnsConfig& config,
                           EmbeddingTable::Metadata metadata = {});

} // namespace embkit::sgns
