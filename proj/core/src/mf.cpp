#include "embkit/mf.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "embkit/rng.hpp"

namespace embkit::mf {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

// ---------------------------------------------------------------------------
// InteractionMatrix
// ---------------------------------------------------------------------------

InteractionMatrix InteractionMatrix::from_triples(
    const std::vector<std::pair<std::pair<std::string, std::string>, double>>& triples) {
    InteractionMatrix m;
    std::vector<std::unordered_map<std::uint32_t, double>> row_maps;
    for (const auto& [key, value] : triples) {
        const auto& [row_id, col_id] = key;
        auto [rit, rfresh] = m.row_index_.try_emplace(row_id, m.row_ids_.size());
        if (rfresh) {
            m.row_ids_.push_back(row_id);
            row_maps.emplace_back();
        }
        auto [cit, cfresh] = m.col_index_.try_emplace(col_id, m.col_ids_.size());
        if (cfresh) m.col_ids_.push_back(col_id);
        row_maps[rit->second][static_cast<std::uint32_t>(cit->second)] += value;
    }
    m.row_ptr_.reserve(m.row_ids_.size() + 1);
    m.row_ptr_.push_back(0);
    for (auto& rm : row_maps) {
        std::vector<std::pair<std::uint32_t, double>> row(rm.begin(), rm.end());
        std::sort(row.begin(), row.end());
        for (const auto& [c, v] : row) {
            if (v == 0.0) continue; // no stored zeros
            m.cols_.push_back(c);
            m.values_.push_back(v);
        }
        m.row_ptr_.push_back(m.cols_.size());
    }
    return m;
}

InteractionMatrix InteractionMatrix::interaction_counts(const std::vector<Event>& events) {
    std::vector<std::pair<std::pair<std::string, std::string>, double>> triples;
    triples.reserve(events.size());
    for (const Event& ev : events)
        triples.push_back({{ev.user_id, ev.product_id}, 1.0});
    return from_triples(triples);
}

std::size_t InteractionMatrix::row_index(std::string_view id) const {
    auto it = row_index_.find(std::string(id));
    return it == row_index_.end() ? npos : it->second;
}

std::size_t InteractionMatrix::col_index(std::string_view id) const {
    auto it = col_index_.find(std::string(id));
    return it == col_index_.end() ? npos : it->second;
}

std::span<const std::uint32_t> InteractionMatrix::row_cols(std::size_t r) const {
    return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
}

std::span<const double> InteractionMatrix::row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
}

void InteractionMatrix::for_each(
    const std::function<void(std::size_t, std::size_t, double)>& fn) const {
    for (std::size_t r = 0; r + 1 < row_ptr_.size(); ++r) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) fn(r, cols_[k], values_[k]);
    }
}

// ---------------------------------------------------------------------------
// BPR-MF
// ---------------------------------------------------------------------------

double BprModel::score(std::string_view user, std::string_view item) const {
    auto uit = user_index.find(std::string(user));
    if (uit == user_index.end()) throw NotFoundError("BPR: unknown user: " + std::string(user));
    auto iit = item_index.find(std::string(item));
    if (iit == item_index.end()) throw NotFoundError("BPR: unknown item: " + std::string(item));
    std::size_t u = uit->second, p = iit->second;
    double dot = 0.0;
    auto gu = user_vec(u);
    auto gp = item_vec(p);
    for (int k = 0; k < dim; ++k) dot += gu[k] * gp[k];
    return alpha + user_bias[u] + item_bias[p] + dot;
}

double bpr_score(const BprModel& model, std::string_view user, std::string_view item) {
    return model.score(user, item);
}

EmbeddingTable BprModel::export_items(const std::string& method,
                                      const std::string& config_digest) const {
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    entries.reserve(item_ids.size());
    for (std::size_t p = 0; p < item_ids.size(); ++p) {
        EmbeddingVector v(dim);
        auto gp = item_vec(p);
        for (int k = 0; k < dim; ++k) v[k] = static_cast<float>(gp[k]);
        entries.emplace_back(item_ids[p], std::move(v));
    }
    return EmbeddingTable(dim, std::move(entries), {method, config_digest});
}

EmbeddingTable BprModel::export_users(const std::string& method,
                                      const std::string& config_digest) const {
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    entries.reserve(user_ids.size());
    for (std::size_t u = 0; u < user_ids.size(); ++u) {
        EmbeddingVector v(dim);
        auto gu = user_vec(u);
        for (int k = 0; k < dim; ++k) v[k] = static_cast<float>(gu[k]);
        entries.emplace_back(user_ids[u], std::move(v));
    }
    return EmbeddingTable(dim, std::move(entries), {method, config_digest});
}

double bpr_triple_objective(const BprModel& model, std::size_t u, std::size_t i, std::size_t j,
                            double reg) {
    auto gu = model.user_vec(u);
    auto gi = model.item_vec(i);
    auto gj = model.item_vec(j);
    double x = model.item_bias[i] - model.item_bias[j];
    double nu = 0.0, ni = 0.0, nj = 0.0;
    for (int k = 0; k < model.dim; ++k) {
        x += gu[k] * (gi[k] - gj[k]);
        nu += gu[k] * gu[k];
        ni += gi[k] * gi[k];
        nj += gj[k] * gj[k];
    }
    return std::log(sigmoid(x)) - reg * (nu + ni + nj);
}

BprTripleGrad bpr_triple_gradient(const BprModel& model, std::size_t u, std::size_t i,
                                  std::size_t j, double reg) {
    auto gu = model.user_vec(u);
    auto gi = model.item_vec(i);
    auto gj = model.item_vec(j);
    double x = model.item_bias[i] - model.item_bias[j];
    for (int k = 0; k < model.dim; ++k) x += gu[k] * (gi[k] - gj[k]);
    double s = sigmoid(-x); // d/dx log(sigmoid(x))

    BprTripleGrad g;
    g.d_beta_i = s;
    g.d_beta_j = -s;
    g.d_user.resize(model.dim);
    g.d_item_i.resize(model.dim);
    g.d_item_j.resize(model.dim);
    for (int k = 0; k < model.dim; ++k) {
        g.d_user[k] = s * (gi[k] - gj[k]) - 2.0 * reg * gu[k];
        g.d_item_i[k] = s * gu[k] - 2.0 * reg * gi[k];
        g.d_item_j[k] = -s * gu[k] - 2.0 * reg * gj[k];
    }
    return g;
}

BprTrainResult bpr_train(const InteractionMatrix& matrix, const BprConfig& config) {
    if (matrix.nnz() == 0) throw DegenerateInputError("BPR: empty interaction matrix");
    if (config.dim < 1) throw ConfigError("BPR: dim must be >= 1");
    const std::size_t n_users = matrix.n_rows();
    const std::size_t n_items = matrix.n_cols();

    BprTrainResult result;
    BprModel& model = result.model;
    model.dim = config.dim;
    model.user_ids = matrix.row_ids();
    model.item_ids = matrix.col_ids();
    for (std::size_t u = 0; u < n_users; ++u) model.user_index.emplace(model.user_ids[u], u);
    for (std::size_t p = 0; p < n_items; ++p) model.item_index.emplace(model.item_ids[p], p);
    model.user_bias.assign(n_users, 0.0);
    model.item_bias.assign(n_items, 0.0);
    model.user_factors.resize(n_users * config.dim);
    model.item_factors.resize(n_items * config.dim);

    Rng rng(config.seed);
    for (double& x : model.user_factors) x = rng.normal(0.0, config.init_sd);
    for (double& x : model.item_factors) x = rng.normal(0.0, config.init_sd);

    // positive pairs; users with a full row can never yield a negative
    std::vector<std::pair<std::uint32_t, std::uint32_t>> positives;
    for (std::size_t u = 0; u < n_users; ++u) {
        auto cols = matrix.row_cols(u);
        if (cols.size() >= n_items) {
            ++result.skipped_users;
            continue;
        }
        for (std::uint32_t c : cols)
            positives.emplace_back(static_cast<std::uint32_t>(u), c);
    }
    if (positives.empty())
        throw DegenerateInputError("BPR: no usable (user, item) positives");

    const double lr = config.learning_rate;
    const double reg = config.reg;
    std::vector<double> diff(config.dim);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        deterministic_shuffle(positives, rng);
        double objective_sum = 0.0;
        for (const auto& [u, i] : positives) {
            auto observed = matrix.row_cols(u);
            std::uint32_t j;
            do {
                j = static_cast<std::uint32_t>(rng.index(n_items));
            } while (std::binary_search(observed.begin(), observed.end(), j));

            objective_sum += bpr_triple_objective(model, u, i, j, reg);

            double* gu = model.user_factors.data() + static_cast<std::size_t>(u) * config.dim;
            double* gi = model.item_factors.data() + static_cast<std::size_t>(i) * config.dim;
            double* gj = model.item_factors.data() + static_cast<std::size_t>(j) * config.dim;
            double x = model.item_bias[i] - model.item_bias[j];
            for (int k = 0; k < config.dim; ++k) {
                diff[k] = gi[k] - gj[k];
                x += gu[k] * diff[k];
            }
            double s = sigmoid(-x);
            model.item_bias[i] += lr * s;
            model.item_bias[j] -= lr * s;
            for (int k = 0; k < config.dim; ++k) {
                double guk = gu[k];
                gu[k] += lr * (s * diff[k] - 2.0 * reg * guk);
                gi[k] += lr * (s * guk - 2.0 * reg * gi[k]);
                gj[k] += lr * (-s * guk - 2.0 * reg * gj[k]);
            }
        }
        result.loss_trace.push_back(objective_sum / static_cast<double>(positives.size()));
    }
    return result;
}

// ---------------------------------------------------------------------------
// NMF
// ---------------------------------------------------------------------------

NmfResult nmf_factorize(const InteractionMatrix& matrix, std::size_t rank,
                        const NmfConfig& config, const NmfObserver& observer) {
    if (rank < 1) throw UsageError("NMF: rank must be >= 1");
    const std::size_t n = matrix.n_rows();
    const std::size_t m = matrix.n_cols();
    if (n == 0 || m == 0 || matrix.nnz() == 0)
        throw DegenerateInputError("NMF: all-zero or empty matrix");

    double total = 0.0, sq_norm = 0.0;
    matrix.for_each([&](std::size_t, std::size_t, double v) {
        if (v < 0.0) throw UsageError("NMF: negative entry in input matrix");
        total += v;
        sq_norm += v * v;
    });
    if (total == 0.0) throw DegenerateInputError("NMF: all stored entries are zero");

    using Eigen::MatrixXd;
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(matrix.nnz());
        matrix.for_each([&](std::size_t r, std::size_t c, double v) {
            trips.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
        });
        A.setFromTriplets(trips.begin(), trips.end());
    }

    const double mean = total / (static_cast<double>(n) * static_cast<double>(m));
    const double init_scale = std::sqrt(mean / static_cast<double>(rank)) + 1e-6;
    Rng rng(config.seed);
    MatrixXd W(n, rank), H(rank, m);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < rank; ++k)
            W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                init_scale * (0.1 + rng.uniform());
    for (std::size_t k = 0; k < rank; ++k)
        for (std::size_t c = 0; c < m; ++c)
            H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
                init_scale * (0.1 + rng.uniform());

    constexpr double kEps = 1e-12;
    auto frob_error = [&]() {
        // |A - WH|_F^2 = |A|^2 - 2<A, WH> + tr((W'W)(HH'))
        double cross = 0.0;
        matrix.for_each([&](std::size_t r, std::size_t c, double v) {
            cross += v * W.row(static_cast<Eigen::Index>(r))
                             .dot(H.col(static_cast<Eigen::Index>(c)));
        });
        MatrixXd WtW = W.transpose() * W;
        MatrixXd HHt = H * H.transpose();
        double wh_sq = (WtW.array() * HHt.array()).sum();
        double sq = sq_norm - 2.0 * cross + wh_sq;
        return std::sqrt(std::max(0.0, sq));
    };

    NmfResult result;
    result.rank = rank;
    double err = frob_error();
    result.error_trace.push_back(err);
    if (observer)
        observer(0, err, {W.data(), static_cast<std::size_t>(W.size())},
                 {H.data(), static_cast<std::size_t>(H.size())});

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        // W <- W .* (A H') ./ (W (H H') + eps)
        MatrixXd AHt = A * H.transpose();
        MatrixXd WHHt = W * (H * H.transpose());
        W = (W.array() * AHt.array() / (WHHt.array() + kEps)).matrix();
        // H <- H .* (W' A) ./ ((W' W) H + eps)
        MatrixXd WtA = (A.transpose() * W).transpose();
        MatrixXd WtWH = (W.transpose() * W) * H;
        H = (H.array() * WtA.array() / (WtWH.array() + kEps)).matrix();

        double prev = err;
        err = frob_error();
        result.error_trace.push_back(err);
        if (observer)
            observer(iter, err, {W.data(), static_cast<std::size_t>(W.size())},
                     {H.data(), static_cast<std::size_t>(H.size())});
        if (prev > 0.0 && (prev - err) / std::max(prev, 1e-300) < config.rel_tol) break;
    }

    result.row_factors.resize(n * rank);
    result.col_factors.resize(m * rank);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < rank; ++k)
            result.row_factors[r * rank + k] =
                W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < m; ++c)
        for (std::size_t k = 0; k < rank; ++k)
            result.col_factors[c * rank + k] =
                H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
    return result;
}

} // namespace embkit::mf
