#include "embkit/dae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "embkit/store.hpp"

namespace embkit::dae {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct EigNet {
    std::vector<MatrixXd> W;
    std::vector<VectorXd> b;
};

EigNet to_eigen(const DaeModel& model) {
    EigNet net;
    for (const DaeLayer& l : model.layers) {
        MatrixXd W(l.out, l.in);
        for (std::size_t r = 0; r < l.out; ++r)
            for (std::size_t c = 0; c < l.in; ++c)
                W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = l.W[r * l.in + c];
        VectorXd b = Eigen::Map<const VectorXd>(l.b.data(), static_cast<Eigen::Index>(l.out));
        net.W.push_back(std::move(W));
        net.b.push_back(std::move(b));
    }
    return net;
}

void from_eigen(const EigNet& net, DaeModel& model) {
    for (std::size_t i = 0; i < net.W.size(); ++i) {
        DaeLayer& l = model.layers[i];
        for (std::size_t r = 0; r < l.out; ++r)
            for (std::size_t c = 0; c < l.in; ++c)
                l.W[r * l.in + c] =
                    net.W[i](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        Eigen::Map<VectorXd>(l.b.data(), static_cast<Eigen::Index>(l.out)) = net.b[i];
    }
}

MatrixXd sigmoid(const MatrixXd& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

/// Activations per layer; a[0] is the input batch (columns are samples),
/// the last layer is linear.
std::vector<MatrixXd> forward_batch(const EigNet& net, const MatrixXd& x) {
    std::vector<MatrixXd> a;
    a.reserve(net.W.size() + 1);
    a.push_back(x);
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        MatrixXd z = (net.W[l] * a.back()).colwise() + net.b[l];
        a.push_back(l + 1 == net.W.size() ? z : sigmoid(z));
    }
    return a;
}

double batch_loss_from_output(const MatrixXd& out, const MatrixXd& target) {
    double b = static_cast<double>(out.cols());
    return (target - out).squaredNorm() / (2.0 * b);
}

/// Backprop of batch_loss_from_output through the net.
EigNet backward_batch(const EigNet& net, const std::vector<MatrixXd>& a, const MatrixXd& target) {
    const double b = static_cast<double>(target.cols());
    EigNet grads;
    grads.W.resize(net.W.size());
    grads.b.resize(net.W.size());
    MatrixXd delta = (a.back() - target) / b; // dJ/dz at the linear output layer
    for (std::size_t l = net.W.size(); l-- > 0;) {
        grads.W[l] = delta * a[l].transpose();
        grads.b[l] = delta.rowwise().sum();
        if (l > 0) {
            MatrixXd da = net.W[l].transpose() * delta;
            delta = (da.array() * a[l].array() * (1.0 - a[l].array())).matrix();
        }
    }
    return grads;
}

MatrixXd batch_from_vectors(const std::vector<std::vector<double>>& xs) {
    if (xs.empty()) throw UsageError("dae: empty batch");
    MatrixXd X(static_cast<Eigen::Index>(xs[0].size()), static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].size() != xs[0].size()) throw UsageError("dae: ragged batch");
        X.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const VectorXd>(xs[i].data(), static_cast<Eigen::Index>(xs[i].size()));
    }
    return X;
}

} // namespace

// ---------------------------------------------------------------------------
// OneHotLayout
// ---------------------------------------------------------------------------

OneHotLayout OneHotLayout::from_catalog(const Catalog& catalog) {
    std::vector<std::string> tokens;
    for (const ProductRecord& rec : catalog.records())
        for (const SideInfoToken& si : rec.si_tokens()) tokens.push_back(si.canonical());
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    OneHotLayout layout;
    layout.tokens_ = std::move(tokens);
    return layout;
}

std::size_t OneHotLayout::index_of(std::string_view token) const {
    auto it = std::lower_bound(tokens_.begin(), tokens_.end(), token);
    if (it == tokens_.end() || *it != token)
        throw DataError("one-hot layout mismatch: unknown SI token '" + std::string(token) + "'");
    return static_cast<std::size_t>(it - tokens_.begin());
}

void OneHotLayout::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const auto& t : tokens_) out << t << '\n';
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

OneHotLayout OneHotLayout::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open for reading: " + path);
    OneHotLayout layout;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) layout.tokens_.push_back(line);
    }
    if (!std::is_sorted(layout.tokens_.begin(), layout.tokens_.end()))
        throw FormatError(path + ": layout tokens not sorted");
    return layout;
}

std::vector<double> one_hot_encode(const ProductRecord& record, const OneHotLayout& layout) {
    std::vector<double> x(layout.width(), 0.0);
    for (const SideInfoToken& si : record.si_tokens()) x[layout.index_of(si.canonical())] = 1.0;
    return x;
}

std::vector<double> corrupt(std::span<const double> x, double scale, Rng& rng) {
    std::vector<double> out(x.begin(), x.end());
    if (scale == 0.0) return out;
    for (double& v : out) v += scale * rng.uniform();
    return out;
}

std::vector<double> corrupt(std::span<const double> x, double scale, std::uint64_t seed) {
    Rng rng(seed);
    return corrupt(x, scale, rng);
}

// ---------------------------------------------------------------------------
// DaeModel
// ---------------------------------------------------------------------------

std::vector<double> DaeModel::encode(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_width)
        throw UsageError("dae encode: input width mismatch");
    VectorXd a = Eigen::Map<const VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    for (std::size_t l = 0; l < 3; ++l) {
        const DaeLayer& layer = layers[l];
        VectorXd z(static_cast<Eigen::Index>(layer.out));
        for (std::size_t r = 0; r < layer.out; ++r) {
            double acc = layer.b[r];
            const double* wrow = layer.W.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) acc += wrow[c] * a[static_cast<Eigen::Index>(c)];
            z[static_cast<Eigen::Index>(r)] = 1.0 / (1.0 + std::exp(-acc));
        }
        a = std::move(z);
    }
    return std::vector<double>(a.data(), a.data() + a.size());
}

std::vector<double> DaeModel::reconstruct(std::span<const double> x) const {
    EigNet net = to_eigen(*this);
    MatrixXd X(static_cast<Eigen::Index>(x.size()), 1);
    X.col(0) = Eigen::Map<const VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    auto a = forward_batch(net, X);
    const MatrixXd& out = a.back();
    return std::vector<double>(out.data(), out.data() + out.rows());
}

void DaeModel::save(const std::string& path) const {
    std::vector<NamedMatrix> mats;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        mats.push_back(NamedMatrix{"W" + std::to_string(l), layers[l].out, layers[l].in,
                                   layers[l].W});
        mats.push_back(NamedMatrix{"b" + std::to_string(l), layers[l].out, 1, layers[l].b});
    }
    save_matrices(mats, path);
}

DaeModel DaeModel::load(const std::string& path) {
    auto mats = load_matrices(path);
    if (mats.size() != 12) throw FormatError(path + ": expected 12 matrices (6 W + 6 b)");
    DaeModel model;
    model.layers.resize(6);
    for (const NamedMatrix& m : mats) {
        if (m.name.size() < 2) throw FormatError(path + ": bad matrix name " + m.name);
        int idx = m.name[1] - '0';
        if (idx < 0 || idx > 5) throw FormatError(path + ": bad layer index in " + m.name);
        DaeLayer& l = model.layers[idx];
        if (m.name[0] == 'W') {
            l.out = m.rows;
            l.in = m.cols;
            l.W = m.values;
        } else {
            l.b = m.values;
        }
    }
    model.input_width = static_cast<int>(model.layers[0].in);
    model.embedding_dim = static_cast<int>(model.layers[2].out);
    return model;
}

std::pair<int, int> hidden_widths(std::size_t input_width, int dim) {
    int V = static_cast<int>(input_width);
    int h1 = std::min(512, std::max(dim, V / 2));
    int h2 = std::min(256, std::max(dim, V / 4));
    return {h1, h2};
}

// ---------------------------------------------------------------------------
// Loss and gradients
// ---------------------------------------------------------------------------

double dae_batch_loss(const DaeModel& model, const std::vector<std::vector<double>>& inputs,
                      const std::vector<std::vector<double>>& targets) {
    if (inputs.size() != targets.size()) throw UsageError("dae loss: batch size mismatch");
    EigNet net = to_eigen(model);
    MatrixXd X = batch_from_vectors(inputs);
    MatrixXd T = batch_from_vectors(targets);
    auto a = forward_batch(net, X);
    return batch_loss_from_output(a.back(), T);
}

std::vector<DaeLayer> dae_batch_gradients(const DaeModel& model,
                                          const std::vector<std::vector<double>>& inputs,
                                          const std::vector<std::vector<double>>& targets) {
    EigNet net = to_eigen(model);
    MatrixXd X = batch_from_vectors(inputs);
    MatrixXd T = batch_from_vectors(targets);
    auto a = forward_batch(net, X);
    EigNet grads = backward_batch(net, a, T);

    std::vector<DaeLayer> out(model.layers.size());
    DaeModel shaped = model; // reuse shapes
    from_eigen(grads, shaped);
    return shaped.layers;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

DaeTrainResult dae_train(const Catalog& catalog, const OneHotLayout& layout,
                         const DaeConfig& config, EmbeddingTable::Metadata metadata) {
    if (catalog.size() == 0) throw DegenerateInputError("dae: empty catalog");
    const int V = static_cast<int>(layout.width());
    if (V < config.dim)
        throw ConfigError("dae: one-hot width " + std::to_string(V) +
                          " is smaller than embedding dimension " + std::to_string(config.dim));
    auto [h1_default, h2_default] = hidden_widths(layout.width(), config.dim);
    const int h1 = config.hidden1 > 0 ? config.hidden1 : h1_default;
    const int h2 = config.hidden2 > 0 ? config.hidden2 : h2_default;

    DaeModel model;
    model.input_width = V;
    model.embedding_dim = config.dim;
    const int widths[7] = {V, h1, h2, config.dim, h2, h1, V};
    Rng init_rng(Rng::mix(config.seed, 0x444145ULL)); // "DAE"
    for (int l = 0; l < 6; ++l) {
        DaeLayer layer;
        layer.in = static_cast<std::size_t>(widths[l]);
        layer.out = static_cast<std::size_t>(widths[l + 1]);
        layer.W.resize(layer.in * layer.out);
        layer.b.assign(layer.out, 0.0);
        double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        for (double& w : layer.W) w = init_rng.uniform(-bound, bound);
        model.layers.push_back(std::move(layer));
    }

    // clean one-hot inputs, catalog order
    const std::size_t n = catalog.size();
    std::vector<std::vector<double>> clean(n);
    for (std::size_t i = 0; i < n; ++i) clean[i] = one_hot_encode(catalog.records()[i], layout);

    EigNet net = to_eigen(model);
    const std::size_t batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);
    std::vector<double> loss_trace;
    loss_trace.reserve(config.epochs);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            std::size_t end = std::min(n, start + batch);
            MatrixXd X(V, static_cast<Eigen::Index>(end - start));
            MatrixXd T(V, static_cast<Eigen::Index>(end - start));
            for (std::size_t i = start; i < end; ++i) {
                // noise keyed by (seed, epoch, product id): invariant to order
                Rng noise(Rng::mix(config.seed, static_cast<std::uint64_t>(epoch),
                                   fnv1a64(catalog.records()[i].id)));
                auto xc = corrupt(clean[i], config.corruption_scale, noise);
                X.col(static_cast<Eigen::Index>(i - start)) =
                    Eigen::Map<const VectorXd>(xc.data(), V);
                T.col(static_cast<Eigen::Index>(i - start)) =
                    Eigen::Map<const VectorXd>(clean[i].data(), V);
            }
            auto a = forward_batch(net, X);
            loss_sum += batch_loss_from_output(a.back(), T);
            ++batches;
            EigNet grads = backward_batch(net, a, T);
            for (std::size_t l = 0; l < net.W.size(); ++l) {
                net.W[l] -= config.learning_rate * grads.W[l];
                net.b[l] -= config.learning_rate * grads.b[l];
            }
        }
        loss_trace.push_back(loss_sum / static_cast<double>(batches));
    }
    from_eigen(net, model);

    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto emb = model.encode(clean[i]);
        EmbeddingVector v(emb.size());
        for (std::size_t k = 0; k < emb.size(); ++k) v[k] = static_cast<float>(emb[k]);
        entries.emplace_back(catalog.records()[i].id, std::move(v));
    }
    EmbeddingTable table(config.dim, std::move(entries), std::move(metadata));
    return DaeTrainResult{std::move(model), std::move(table), std::move(loss_trace)};
}

} // namespace embkit::dae
