#include "embkit/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "embkit/dae.hpp"
#include "embkit/graph.hpp"
#include "embkit/mf.hpp"
#include "embkit/rng.hpp"
#include "embkit/sgns.hpp"
#include "embkit/store.hpp"

namespace embkit::pipeline {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

std::string method_name(Method m) {
    switch (m) {
        case Method::bpr_mf: return "BPR-MF";
        case Method::dae: return "DAE";
        case Method::ie: return "IE";
        case Method::p2v: return "P2V";
        case Method::psi2v: return "PSI2V";
        case Method::dwp2v: return "DWP2V";
        case Method::dwpsi2v: return "DWPSI2V";
        case Method::upsii2v: return "UPSII2V";
        case Method::udwpsii2v: return "UDWPSII2V";
    }
    return "?";
}

std::string method_file_stem(Method m) {
    switch (m) {
        case Method::bpr_mf: return "bpr_mf";
        case Method::dae: return "dae";
        case Method::ie: return "ie";
        case Method::p2v: return "p2v";
        case Method::psi2v: return "psi2v";
        case Method::dwp2v: return "dwp2v";
        case Method::dwpsi2v: return "dwpsi2v";
        case Method::upsii2v: return "upsii2v";
        case Method::udwpsii2v: return "udwpsii2v";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    std::string n;
    for (char c : name) {
        if (c == '-') c = '_';
        n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (Method m : kAllMethods)
        if (n == method_file_stem(m)) return m;
    throw ConfigError("unknown method '" + name +
                      "' (expected one of BPR-MF, DAE, IE, P2V, PSI2V, DWP2V, DWPSI2V, "
                      "UPSII2V, UDWPSII2V)");
}

bool method_needs_images(Method m) {
    return m == Method::ie || m == Method::upsii2v || m == Method::udwpsii2v;
}

bool method_needs_events(Method m) {
    return !(m == Method::dae || m == Method::ie);
}

// ---------------------------------------------------------------------------
// Data loading
// ---------------------------------------------------------------------------

Dataset load_dataset(const std::string& catalog_path, const std::string& events_path,
                     const config::KeyValueConfig& cfg) {
    Dataset ds;
    ingest::CatalogParseOptions copts;
    copts.policy = cfg.get_bool("ingest", "skip_bad_lines", false)
                       ? ingest::ErrorPolicy::skip_and_count
                       : ingest::ErrorPolicy::abort_on_error;
    ds.catalog = Catalog(ingest::parse_catalog_file(catalog_path, copts).records);

    ingest::EventParseOptions eopts;
    eopts.policy = copts.policy;
    eopts.catalog = &ds.catalog;
    eopts.strict_catalog = cfg.get_bool("ingest", "strict_catalog", false);
    ds.events = ingest::parse_events_file(events_path, eopts).events;

    ds.sessions = ingest::build_sessions(ds.events);
    ds.lifetime_lists =
        ingest::build_lifetime_lists(ds.events, cfg.get_int("ingest", "min_purchases", 3));
    return ds;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

int embedding_dim(const config::KeyValueConfig& cfg) {
    return cfg.get_int("embedding", "dim", 100);
}

sgns::SgnsConfig sgns_config_from(const config::KeyValueConfig& cfg, std::uint64_t seed) {
    sgns::SgnsConfig sc;
    sc.dimension = embedding_dim(cfg);
    sc.negatives = cfg.get_int("sgns", "negatives", 5);
    sc.unigram_exponent = cfg.get_double("sgns", "unigram_exponent", 0.75);
    sc.learning_rate = cfg.get_double("sgns", "learning_rate", 0.025);
    sc.epochs = cfg.get_int("sgns", "epochs", 5);
    sc.seed = seed;
    return sc;
}

std::vector<std::vector<std::string>> lifetime_token_lists(const Dataset& dataset) {
    std::vector<std::vector<std::string>> lists;
    lists.reserve(dataset.lifetime_lists.size());
    for (const LifetimeList& l : dataset.lifetime_lists) lists.push_back(l.tokens());
    return lists;
}

unify::UnifyConfig unify_config_from(const config::KeyValueConfig& cfg) {
    unify::UnifyConfig uc;
    uc.method = unify::parse_unify_method(
        cfg.get("unify", "method", "weighted_average"));
    uc.w_image = cfg.get_double("unify", "w_image", 0.1);
    uc.w_psv = cfg.get_double("unify", "w_psv", 0.9);
    uc.normalize_inputs = cfg.get_bool("unify", "normalize", true);
    return uc;
}

} // namespace

std::vector<std::vector<std::string>> deepwalk_sessions(const Dataset& dataset,
                                                        const config::KeyValueConfig& cfg,
                                                        std::uint64_t seed) {
    graph::ImportanceWeights weights = graph::compute_importance(dataset.events);
    mf::InteractionMatrix W = graph::build_weighted_matrix(dataset.events, weights);

    graph::ItemGraphConfig gc;
    gc.rank = static_cast<std::size_t>(cfg.get_int("graph", "rank", embedding_dim(cfg)));
    gc.top_k = static_cast<std::size_t>(cfg.get_int("graph", "top_k", 20));
    gc.nmf.max_iters = cfg.get_int("graph", "nmf_iters", 150);
    gc.nmf.rel_tol = cfg.get_double("graph", "nmf_tol", 1e-5);
    gc.nmf.seed = Rng::mix(seed, 0x6e6d66); // "nmf"
    graph::ItemGraph g = graph::build_item_graph(W, gc);

    graph::DeepWalkConfig dw;
    dw.walks_per_node = static_cast<std::size_t>(cfg.get_int("graph", "walks_per_node", 10));
    dw.walk_length = static_cast<std::size_t>(cfg.get_int("graph", "walk_length", 40));
    dw.seed = Rng::mix(seed, 0x77616c6b); // "walk"
    auto walks = graph::deepwalk_walks(g, dw);

    if (std::string path = cfg.get("graph", "dump_graph", ""); !path.empty())
        g.save_edges_tsv(path);
    if (std::string path = cfg.get("graph", "dump_walks", ""); !path.empty())
        graph::save_walks(walks, path);
    return walks;
}

namespace {

/// Config-gated pair-stream dump for oracle verification.
void maybe_dump_pairs(const sgns::PairSource& source, const config::KeyValueConfig& cfg,
                      const std::string& stem) {
    std::string prefix = cfg.get("sgns", "dump_pairs", "");
    if (prefix.empty()) return;
    sgns::dump_pairs_tsv(source, prefix + "_" + stem + ".tsv");
}

} // namespace

TrainOutput train_method(Method method, const Dataset& dataset, const EmbeddingTable* images,
                         const config::KeyValueConfig& cfg, std::uint64_t seed,
                         const std::map<Method, const EmbeddingTable*>* cache) {
    const std::string digest = config::config_digest(cfg, seed);
    const EmbeddingTable::Metadata meta{method_name(method), digest};
    const int window = cfg.get_int("sgns", "window", 0);

    switch (method) {
        case Method::bpr_mf: {
            mf::BprConfig bc;
            bc.dim = embedding_dim(cfg);
            bc.learning_rate = cfg.get_double("bpr", "learning_rate", 0.05);
            bc.reg = cfg.get_double("bpr", "reg", 0.01);
            bc.epochs = cfg.get_int("bpr", "epochs", 20);
            bc.init_sd = cfg.get_double("bpr", "init_sd", 0.01);
            bc.seed = Rng::mix(seed, 0x627072); // "bpr"
            auto matrix = mf::InteractionMatrix::interaction_counts(dataset.events);
            auto trained = mf::bpr_train(matrix, bc);
            TrainOutput out{trained.model.export_items(method_name(method), digest),
                            std::move(trained.loss_trace),
                            trained.model.export_users("BPR-MF-users", digest)};
            return out;
        }
        case Method::dae: {
            dae::OneHotLayout layout = dae::OneHotLayout::from_catalog(dataset.catalog);
            dae::DaeConfig dc;
            dc.dim = embedding_dim(cfg);
            dc.epochs = cfg.get_int("dae", "epochs", 50);
            dc.learning_rate = cfg.get_double("dae", "learning_rate", 0.1);
            dc.batch_size = static_cast<std::size_t>(cfg.get_int("dae", "batch_size", 32));
            dc.corruption_scale = cfg.get_double("dae", "corruption_scale", 0.5);
            dc.hidden1 = cfg.get_int("dae", "hidden1", 0);
            dc.hidden2 = cfg.get_int("dae", "hidden2", 0);
            dc.seed = Rng::mix(seed, 0x646165); // "dae"
            auto trained = dae::dae_train(dataset.catalog, layout, dc, meta);
            TrainOutput out{std::move(trained.table), std::move(trained.loss_trace), {}, {}, {}};
            out.dae_model = std::move(trained.model);
            out.dae_layout = std::move(layout);
            return out;
        }
        case Method::ie: {
            if (!images) throw ConfigError("IE: image-vector table required");
            std::vector<std::pair<std::string, EmbeddingVector>> entries;
            entries.reserve(images->size());
            for (std::size_t i = 0; i < images->size(); ++i) {
                auto v = images->vec_at(i);
                entries.emplace_back(images->tokens()[i], EmbeddingVector(v.begin(), v.end()));
            }
            return TrainOutput{EmbeddingTable(images->dimension(), std::move(entries), meta),
                               {},
                               {}};
        }
        case Method::p2v: {
            auto lists = lifetime_token_lists(dataset);
            auto source = sgns::prod2vec_source(lists, window);
            maybe_dump_pairs(source, cfg, "p2v");
            auto trained = sgns::sgns_train(source, sgns_config_from(cfg, Rng::mix(seed, 1)), meta);
            return TrainOutput{std::move(trained.table), std::move(trained.loss_trace), {}};
        }
        case Method::psi2v: {
            auto lists = lifetime_token_lists(dataset);
            auto source = sgns::prodsi2vec_source(lists, dataset.catalog, window);
            maybe_dump_pairs(source, cfg, "psi2v");
            auto trained = sgns::sgns_train(source, sgns_config_from(cfg, Rng::mix(seed, 2)), meta);
            return TrainOutput{std::move(trained.table), std::move(trained.loss_trace), {}};
        }
        case Method::dwp2v: {
            auto walks = deepwalk_sessions(dataset, cfg, seed);
            auto source = sgns::prod2vec_source(walks, window);
            maybe_dump_pairs(source, cfg, "dwp2v");
            auto trained = sgns::sgns_train(source, sgns_config_from(cfg, Rng::mix(seed, 3)), meta);
            return TrainOutput{std::move(trained.table), std::move(trained.loss_trace), {}};
        }
        case Method::dwpsi2v: {
            auto walks = deepwalk_sessions(dataset, cfg, seed);
            auto source = sgns::prodsi2vec_source(walks, dataset.catalog, window);
            maybe_dump_pairs(source, cfg, "dwpsi2v");
            auto trained = sgns::sgns_train(source, sgns_config_from(cfg, Rng::mix(seed, 4)), meta);
            return TrainOutput{std::move(trained.table), std::move(trained.loss_trace), {}};
        }
        case Method::upsii2v:
        case Method::udwpsii2v: {
            if (!images) throw ConfigError(method_name(method) + ": image-vector table required");
            const Method base = method == Method::upsii2v ? Method::psi2v : Method::dwpsi2v;
            const EmbeddingTable* base_table = nullptr;
            TrainOutput base_out;
            if (cache && cache->count(base)) {
                base_table = cache->at(base);
            } else {
                base_out = train_method(base, dataset, images, cfg, seed, cache);
                base_table = &base_out.table;
            }
            unify::UnifyConfig uc = unify_config_from(cfg);
            return TrainOutput{unify::unify(*images, *base_table, uc, meta), {}, {}};
        }
    }
    throw ConfigError("unhandled method");
}

void write_loss_csv(const std::vector<double>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "epoch,objective\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, trace[i]);
        out << buf;
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// File-level steps
// ---------------------------------------------------------------------------

synth::WorldConfig world_config_from(const config::KeyValueConfig& cfg, std::uint64_t seed) {
    synth::WorldConfig wc;
    wc.n_products = static_cast<std::size_t>(cfg.get_int("world", "n_products", 2000));
    wc.n_users = static_cast<std::size_t>(cfg.get_int("world", "n_users", 5000));
    wc.n_styles = static_cast<std::size_t>(cfg.get_int("world", "n_styles", 4));
    wc.clicks_per_user = cfg.get_double("world", "clicks_per_user", 30.0);
    wc.bags_per_user = cfg.get_double("world", "bags_per_user", 8.0);
    wc.purchases_per_user = cfg.get_double("world", "purchases_per_user", 4.0);
    wc.popularity_skew = cfg.get_double("world", "popularity_skew", 1.05);
    wc.noise_click_rate = cfg.get_double("world", "noise_click_rate", 0.10);
    wc.user_affinity = cfg.get_double("world", "user_affinity", 0.85);
    wc.brands_per_cluster = cfg.get_int("world", "brands_per_cluster", 2);
    wc.brand_purity = cfg.get_double("world", "brand_purity", 0.90);
    wc.priceband_purity = cfg.get_double("world", "priceband_purity", 0.85);
    wc.color_affinity = cfg.get_double("world", "color_affinity", 0.30);
    wc.si_missing_rate = cfg.get_double("world", "si_missing_rate", 0.02);
    wc.return_base_rate = cfg.get_double("world", "return_base_rate", 0.30);
    wc.return_user_sd = cfg.get_double("world", "return_user_sd", 1.0);
    wc.return_cluster_sd = cfg.get_double("world", "return_cluster_sd", 1.0);
    wc.return_product_sd = cfg.get_double("world", "return_product_sd", 0.3);
    wc.return_price_coef = cfg.get_double("world", "return_price_coef", 0.5);
    wc.return_noise_sd = cfg.get_double("world", "return_noise_sd", 0.5);
    wc.image_dim = cfg.get_int("world", "image_dim", embedding_dim(cfg));
    wc.image_noise = cfg.get_double("world", "image_noise", 0.25);
    wc.seed = seed;
    return wc;
}

SynthFiles synth_to_dir(const config::KeyValueConfig& cfg, std::uint64_t seed,
                        const std::string& out_dir) {
    fs::create_directories(out_dir);
    synth::WorldConfig wc = world_config_from(cfg, seed);
    synth::World world = synth::gen_world(wc);
    for (const std::string& w : world.warnings) std::fprintf(stderr, "synth: warning: %s\n", w.c_str());

    SynthFiles files;
    files.catalog = (fs::path(out_dir) / "catalog.jsonl").string();
    files.events = (fs::path(out_dir) / "events.jsonl").string();
    files.truth = (fs::path(out_dir) / "ground_truth.jsonl").string();
    files.images = (fs::path(out_dir) / "images.embk").string();
    synth::write_catalog_jsonl(world.catalog, files.catalog);
    synth::write_events_jsonl(world.events, files.events);
    synth::write_ground_truth_jsonl(world.truth, files.truth);

    EmbeddingTable images(world.images.dimension(), [&] {
        std::vector<std::pair<std::string, EmbeddingVector>> entries;
        entries.reserve(world.images.size());
        for (std::size_t i = 0; i < world.images.size(); ++i) {
            auto v = world.images.vec_at(i);
            entries.emplace_back(world.images.tokens()[i], EmbeddingVector(v.begin(), v.end()));
        }
        return entries;
    }(), {"IE", config::config_digest(cfg, seed)});
    save_table_binary(images, files.images);
    write_table_metadata(images, files.images);
    return files;
}

std::string train_to_dir(Method method, const Dataset& dataset, const EmbeddingTable* images,
                         const config::KeyValueConfig& cfg, std::uint64_t seed,
                         const std::string& out_dir,
                         const std::map<Method, const EmbeddingTable*>* cache) {
    fs::create_directories(out_dir);
    TrainOutput out = train_method(method, dataset, images, cfg, seed, cache);
    const std::string stem = method_file_stem(method);
    const std::string table_path = (fs::path(out_dir) / (stem + ".embk")).string();
    save_table_binary(out.table, table_path);
    write_table_metadata(out.table, table_path);
    if (!out.loss_trace.empty())
        write_loss_csv(out.loss_trace, (fs::path(out_dir) / (stem + "_loss.csv")).string());
    if (out.user_table) {
        const std::string upath = (fs::path(out_dir) / (stem + "_users.embk")).string();
        save_table_binary(*out.user_table, upath);
        write_table_metadata(*out.user_table, upath);
    }
    if (out.dae_model) out.dae_model->save((fs::path(out_dir) / (stem + "_model.embm")).string());
    if (out.dae_layout) out.dae_layout->save((fs::path(out_dir) / (stem + "_layout.txt")).string());
    return table_path;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

std::string task_name(Task t) {
    switch (t) {
        case Task::attributes: return "attributes";
        case Task::clicked_purchased: return "clicked_purchased";
        case Task::sparsity: return "sparsity";
        case Task::returns: return "returns";
    }
    return "?";
}

Task parse_task(const std::string& name) {
    for (Task t : kAllTasks)
        if (name == task_name(t)) return t;
    throw ConfigError("unknown task '" + name +
                      "' (expected attributes, clicked_purchased, sparsity, or returns)");
}

namespace {

std::vector<eval::ReturnRecord> return_records_from(const EvalInputs& inputs) {
    std::vector<eval::ReturnRecord> records;
    if (inputs.truth && !inputs.truth->carts.empty()) {
        records.reserve(inputs.truth->carts.size());
        for (const synth::CartObservation& c : inputs.truth->carts)
            records.push_back(eval::ReturnRecord{c.user_id, c.product_id, c.session_id, c.ts,
                                                 c.returned});
        return records;
    }
    // real-data mode: purchase events carrying the "returned" extension field
    for (const Event& ev : inputs.dataset->events) {
        if (ev.type != EventType::purchase || !ev.returned) continue;
        records.push_back(
            eval::ReturnRecord{ev.user_id, ev.product_id, ev.session_id, ev.ts, *ev.returned});
    }
    if (records.empty())
        throw DataError("returns task: no labeled carts (need ground truth or events with a "
                        "'returned' field)");
    return records;
}

} // namespace

eval::EvalReport run_eval_task(Task task, const EvalInputs& inputs,
                               const config::KeyValueConfig& cfg, std::uint64_t seed) {
    if (!inputs.table) throw UsageError("eval: no embedding table");
    if (!inputs.dataset) throw UsageError("eval: no dataset");
    const std::uint64_t eval_seed = Rng::mix(seed, 0x6576616c); // "eval"

    switch (task) {
        case Task::attributes: {
            eval::AttributeTaskConfig ac;
            ac.sample_size = static_cast<std::size_t>(cfg.get_int("eval", "sample_size", 1000));
            ac.ks = cfg.get_sizes("eval", "attribute_ks", {1, 2, 5, 10, 15, 20});
            ac.seed = eval_seed;
            return eval::attribute_precision_at_k(*inputs.table, inputs.dataset->catalog, ac);
        }
        case Task::clicked_purchased: {
            if (!inputs.reference)
                throw ConfigError("clicked_purchased: a reference table is required for pruning");
            eval::ClickedPurchasedConfig cc;
            cc.window = static_cast<std::size_t>(cfg.get_int("eval", "window", 14));
            cc.coherence_threshold = cfg.get_double("eval", "coherence_threshold", 0.6);
            cc.min_user_purchases = cfg.get_int("eval", "min_user_purchases", 3);
            cc.max_sessions = static_cast<std::size_t>(cfg.get_int("eval", "max_sessions", 2000));
            cc.seed = eval_seed;
            return eval::clicked_purchased_rank(*inputs.table, inputs.dataset->sessions,
                                                *inputs.reference, cc);
        }
        case Task::sparsity: {
            eval::SparseHitRatioConfig sc;
            sc.sparse_quantile = cfg.get_double("eval", "sparse_quantile", 0.05);
            sc.ks = cfg.get_sizes("eval", "hr_ks", {1, 5, 10, 20});
            sc.any_later_click = cfg.get_bool("eval", "any_later_click", false);
            sc.max_queries = static_cast<std::size_t>(cfg.get_int("eval", "max_queries", 20000));
            sc.seed = eval_seed;
            return eval::sparse_hit_ratio(*inputs.table, inputs.dataset->sessions,
                                          inputs.dataset->events, sc);
        }
        case Task::returns: {
            eval::ReturnTaskConfig rc;
            rc.train_fraction = cfg.get_double("eval", "train_fraction", 0.8);
            rc.include_embeddings = cfg.get_bool("eval", "include_embeddings", true);
            rc.logreg.iters = cfg.get_int("eval", "logreg_iters", 500);
            rc.logreg.learning_rate = cfg.get_double("eval", "logreg_lr", 0.5);
            rc.logreg.reg = cfg.get_double("eval", "logreg_reg", 1e-4);
            auto records = return_records_from(inputs);
            auto result = eval::run_return_prediction(std::move(records), inputs.dataset->catalog,
                                                      inputs.table, inputs.user_table, rc);
            return eval::return_prediction_report(result, inputs.table->metadata().method);
        }
    }
    throw ConfigError("unhandled task");
}

unify::ValidationTask make_validation_task(Task task, const EvalInputs& inputs,
                                           const config::KeyValueConfig& cfg,
                                           std::uint64_t seed) {
    unify::ValidationTask vt;
    vt.name = task_name(task);
    switch (task) {
        case Task::attributes:
            vt.higher_is_better = true;
            vt.evaluate = [inputs, cfg, seed](const EmbeddingTable& t) {
                EvalInputs in = inputs;
                in.table = &t;
                return run_eval_task(Task::attributes, in, cfg, seed).value("brand", 10.0);
            };
            return vt;
        case Task::sparsity:
            vt.higher_is_better = true;
            vt.evaluate = [inputs, cfg, seed](const EmbeddingTable& t) {
                EvalInputs in = inputs;
                in.table = &t;
                return run_eval_task(Task::sparsity, in, cfg, seed).value("", 10.0);
            };
            return vt;
        case Task::clicked_purchased:
            vt.higher_is_better = false;
            vt.evaluate = [inputs, cfg, seed](const EmbeddingTable& t) {
                EvalInputs in = inputs;
                in.table = &t;
                return run_eval_task(Task::clicked_purchased, in, cfg, seed).value("", 1.0);
            };
            return vt;
        case Task::returns:
            vt.higher_is_better = true;
            vt.evaluate = [inputs, cfg, seed](const EmbeddingTable& t) {
                EvalInputs in = inputs;
                in.table = &t;
                return run_eval_task(Task::returns, in, cfg, seed).value("f1", 0.0);
            };
            return vt;
    }
    throw ConfigError("unhandled validation task");
}

// ---------------------------------------------------------------------------
// Whole pipeline
// ---------------------------------------------------------------------------

std::vector<std::string> run_full(const config::KeyValueConfig& cfg, std::uint64_t seed,
                                  const std::string& out_dir) {
    fs::create_directories(out_dir);
    SynthFiles files = synth_to_dir(cfg, seed, out_dir);
    Dataset dataset = load_dataset(files.catalog, files.events, cfg);
    synth::GroundTruth truth = synth::read_ground_truth_jsonl(files.truth);
    EmbeddingTable images = load_table(files.images);

    // base methods first, unified methods from the cache
    std::map<Method, EmbeddingTable> tables;
    std::map<Method, const EmbeddingTable*> cache;
    const std::array<Method, 7> base = {Method::bpr_mf, Method::dae,   Method::ie,     Method::p2v,
                                        Method::psi2v,  Method::dwp2v, Method::dwpsi2v};
    for (Method m : base) {
        TrainOutput out = train_method(m, dataset, &images, cfg, seed);
        const std::string stem = method_file_stem(m);
        const std::string path = (fs::path(out_dir) / (stem + ".embk")).string();
        save_table_binary(out.table, path);
        write_table_metadata(out.table, path);
        if (!out.loss_trace.empty())
            write_loss_csv(out.loss_trace, (fs::path(out_dir) / (stem + "_loss.csv")).string());
        if (out.user_table) {
            const std::string upath = (fs::path(out_dir) / (stem + "_users.embk")).string();
            save_table_binary(*out.user_table, upath);
            write_table_metadata(*out.user_table, upath);
        }
        if (out.dae_model)
            out.dae_model->save((fs::path(out_dir) / (stem + "_model.embm")).string());
        if (out.dae_layout)
            out.dae_layout->save((fs::path(out_dir) / (stem + "_layout.txt")).string());
        tables.emplace(m, std::move(out.table));
        cache[m] = &tables.at(m);
    }
    for (Method m : {Method::upsii2v, Method::udwpsii2v}) {
        TrainOutput out = train_method(m, dataset, &images, cfg, seed, &cache);
        const std::string path =
            (fs::path(out_dir) / (method_file_stem(m) + ".embk")).string();
        save_table_binary(out.table, path);
        write_table_metadata(out.table, path);
        tables.emplace(m, std::move(out.table));
        cache[m] = &tables.at(m);
    }

    const std::string reports_dir = (fs::path(out_dir) / "reports").string();
    fs::create_directories(reports_dir);
    const Method reference_method = parse_method(cfg.get("eval", "reference", "PSI2V"));
    for (Method m : kAllMethods) {
        EvalInputs in;
        in.dataset = &dataset;
        in.table = cache.at(m);
        in.reference = cache.at(reference_method);
        in.truth = &truth;
        for (Task t : kAllTasks) {
            eval::EvalReport report = run_eval_task(t, in, cfg, seed);
            eval::write_report_csv(report, (fs::path(reports_dir) /
                                            (task_name(t) + "_" + method_file_stem(m) + ".csv"))
                                               .string());
        }
    }

    std::vector<std::string> written;
    for (const auto& entry : fs::recursive_directory_iterator(out_dir))
        if (entry.is_regular_file()) written.push_back(entry.path().string());
    std::sort(written.begin(), written.end());
    return written;
}

} // namespace embkit::pipeline
