#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embkit/embedding.hpp"
#include "embkit/rng.hpp"
#include "embkit/types.hpp"

namespace embkit::dae {

/// Ordered list of all SI tokens observed in a catalog (sorted, so the layout
/// is independent of record order) with a token -> index bijection.
class OneHotLayout {
public:
    static OneHotLayout from_catalog(const Catalog& catalog);

    std::size_t width() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    /// Throws DataError when the token is not part of this layout.
    std::size_t index_of(std::string_view token) const;

    /// One token per line.
    void save(const std::string& path) const;
    static OneHotLayout load(const std::string& path);

private:
    std::vector<std::string> tokens_; // sorted; index lookups binary-search
};

/// Multi-hot vector of a record's present SI tokens; at most six ones.
std::vector<double> one_hot_encode(const ProductRecord& record, const OneHotLayout& layout);

/// x + scale * u, u ~ Uniform[0,1) per component. Scale 0 is the identity.
std::vector<double> corrupt(std::span<const double> x, double scale, Rng& rng);
std::vector<double> corrupt(std::span<const double> x, double scale, std::uint64_t seed);

/// One dense layer, W row-major (out x in).
struct DaeLayer {
    std::size_t in = 0, out = 0;
    std::vector<double> W;
    std::vector<double> b;
};

/// 3-layer encoder + 3-layer decoder; sigmoid everywhere except the final
/// (linear) decoder layer. The innermost width is the embedding dimension.
struct DaeModel {
    int input_width = 0;
    int embedding_dim = 0;
    std::vector<DaeLayer> layers; // 6 layers, encoder first

    std::vector<double> encode(std::span<const double> x) const;
    std::vector<double> reconstruct(std::span<const double> x) const;

    void save(const std::string& path) const;
    static DaeModel load(const std::string& path);
};

/// (hidden1, hidden2) = (512, 256) scaled down proportionally when V < 512,
/// never below the embedding dimension.
std::pair<int, int> hidden_widths(std::size_t input_width, int dim);

struct DaeConfig {
    int dim = 100;
    int epochs = 50;
    double learning_rate = 0.1;
    std::size_t batch_size = 0; // 0 = full batch
    double corruption_scale = 0.5;
    std::uint64_t seed = 1;
    int hidden1 = 0, hidden2 = 0; // 0 = derived via hidden_widths
};

/// Mean reconstruction loss 1/(2B) * sum |target_i - reconstruct(input_i)|^2
/// over a batch; inputs are the (corrupted) network inputs, targets the clean
/// vectors. This is the quantity training descends and the finite-difference
/// oracle probes.
double dae_batch_loss(const DaeModel& model, const std::vector<std::vector<double>>& inputs,
                      const std::vector<std::vector<double>>& targets);

/// Analytic gradient of dae_batch_loss for every layer.
std::vector<DaeLayer> dae_batch_gradients(const DaeModel& model,
                                          const std::vector<std::vector<double>>& inputs,
                                          const std::vector<std::vector<double>>& targets);

struct DaeTrainResult {
    DaeModel model;
    EmbeddingTable table;           // Enc(x_i) on uncorrupted inputs
    std::vector<double> loss_trace; // mean corrupted-batch loss per epoch
};

/// Gradient descent on the corrupted-reconstruction loss. Corruption noise is
/// seeded per (epoch, product id), so full-batch loss does not depend on
/// catalog order. Exported embeddings are encoder outputs on uncorrupted
/// inputs. Throws ConfigError when the layout width is below the embedding
/// dimension.
DaeTrainResult dae_train(const Catalog& catalog, const OneHotLayout& layout,
                         const DaeConfig& config, EmbeddingTable::Metadata metadata = {});

} // namespace embkit::dae
