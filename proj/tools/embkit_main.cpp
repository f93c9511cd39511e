#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "embkit/config.hpp"
#include "embkit/eval.hpp"
#include "embkit/pipeline.hpp"
#include "embkit/store.hpp"
#include "embkit/unify.hpp"

namespace fs = std::filesystem;
using namespace embkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 42;
    bool seed_given = false;
    std::string out_dir = ".";
    bool force = false;
};

config::KeyValueConfig load_config(const CommonArgs& args) {
    if (args.config_path.empty()) return {};
    if (!fs::exists(args.config_path))
        throw ConfigError("missing config file: " + args.config_path);
    return config::KeyValueConfig::from_file(args.config_path);
}

std::uint64_t effective_seed(const CommonArgs& args, const config::KeyValueConfig& cfg) {
    if (args.seed_given) return args.seed;
    return cfg.get_u64("", "seed", args.seed);
}

void require_input(const std::string& what, const std::string& path) {
    if (path.empty()) throw ConfigError("missing required input: " + what);
    if (!fs::exists(path)) throw ConfigError("missing " + what + ": " + path);
}

/// Digest gate: a table trained under a different config/seed is refused
/// unless --force.
void check_digest(const EmbeddingTable& table, const config::KeyValueConfig& cfg,
                  std::uint64_t seed, bool force, const std::string& path) {
    const std::string expected = config::config_digest(cfg, seed);
    const std::string& actual = table.metadata().config_digest;
    if (actual.empty() || actual == expected) return;
    if (force) {
        std::fprintf(stderr, "warning: %s: config digest mismatch (have %s, expected %s); "
                             "proceeding due to --force\n",
                     path.c_str(), actual.c_str(), expected.c_str());
        return;
    }
    throw ConfigError(path + ": config digest mismatch (table " + actual + ", config " + expected +
                      "); pass --force to evaluate anyway");
}

int run_cli(int argc, char** argv) {
    CLI::App app{"embkit: product embeddings from catalog, clickstream, and image data"};
    app.require_subcommand(1);

    CommonArgs common;
    auto add_common = [&common](CLI::App* cmd, bool with_out = true) {
        cmd->add_option("--config", common.config_path, "config file (TOML-like key=value)");
        cmd->add_option("--seed", common.seed, "random seed")
            ->each([&common](const std::string&) { common.seed_given = true; });
        if (with_out) cmd->add_option("--out", common.out_dir, "output directory");
        cmd->add_flag("--force", common.force, "bypass config digest checks");
    };

    // --- synth --------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic world");
    add_common(synth_cmd);

    // --- train --------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train one embedding method");
    std::string method_arg;
    std::string catalog_path, events_path, images_path;
    train_cmd->add_option("METHOD", method_arg, "method name (e.g. P2V)");
    train_cmd->add_option("--method", method_arg, "method name (alternative to positional)");
    train_cmd->add_option("--catalog", catalog_path, "catalog JSONL (gzip ok)");
    train_cmd->add_option("--events", events_path, "events JSONL (gzip ok)");
    train_cmd->add_option("--images", images_path, "image-vector store (EMBK or text)");
    add_common(train_cmd);

    // --- unify --------------------------------------------------------------
    auto* unify_cmd = app.add_subcommand("unify", "combine image and word2vec tables");
    std::string unify_images, unify_psv, unify_name = "unified", grid_task;
    unify_cmd->add_option("--images", unify_images, "image-vector table");
    unify_cmd->add_option("--psv", unify_psv, "word2vec-family table (PSI2V or DWPSI2V)");
    unify_cmd->add_option("--name", unify_name, "output method name / file stem");
    unify_cmd->add_option("--grid-task", grid_task,
                          "learn weights by grid search on this task "
                          "(attributes, sparsity, clicked_purchased)");
    unify_cmd->add_option("--catalog", catalog_path, "catalog JSONL (grid tasks)");
    unify_cmd->add_option("--events", events_path, "events JSONL (grid tasks)");
    add_common(unify_cmd);

    // --- eval ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a table on one downstream task");
    std::string task_arg, table_path, reference_path, truth_path, user_table_path;
    eval_cmd->add_option("TASK", task_arg,
                         "task (attributes, clicked_purchased, sparsity, returns)");
    eval_cmd->add_option("--task", task_arg, "task (alternative to positional)");
    eval_cmd->add_option("--table", table_path, "embedding table under test");
    eval_cmd->add_option("--catalog", catalog_path, "catalog JSONL");
    eval_cmd->add_option("--events", events_path, "events JSONL");
    eval_cmd->add_option("--reference", reference_path,
                         "reference table for clicked_purchased pruning");
    eval_cmd->add_option("--truth", truth_path, "ground-truth JSONL (returns task)");
    eval_cmd->add_option("--user-table", user_table_path, "user-vector table (returns task)");
    add_common(eval_cmd);

    // --- neighbors ----------------------------------------------------------
    auto* nb_cmd = app.add_subcommand("neighbors", "print a token's nearest neighbors");
    std::string nb_token;
    int nb_k = 10;
    nb_cmd->add_option("TOKEN", nb_token, "query token")->required();
    nb_cmd->add_option("--table", table_path, "embedding table");
    nb_cmd->add_option("--catalog", catalog_path, "catalog JSONL for SI annotations");
    nb_cmd->add_option("-k,--k", nb_k, "neighbor count");
    add_common(nb_cmd, false);

    // --- pipeline -----------------------------------------------------------
    auto* full_cmd = app.add_subcommand(
        "pipeline", "synth + train all nine methods + unify + eval everything");
    add_common(full_cmd);

    CLI11_PARSE(app, argc, argv);

    config::KeyValueConfig cfg = load_config(common);
    const std::uint64_t seed = effective_seed(common, cfg);

    if (synth_cmd->parsed()) {
        auto files = pipeline::synth_to_dir(cfg, seed, common.out_dir);
        std::printf("wrote %s\nwrote %s\nwrote %s\nwrote %s\n", files.catalog.c_str(),
                    files.events.c_str(), files.truth.c_str(), files.images.c_str());
        return kExitOk;
    }

    if (train_cmd->parsed()) {
        if (method_arg.empty()) throw ConfigError("train: no method given");
        pipeline::Method method = pipeline::parse_method(method_arg);
        require_input("catalog file (--catalog)", catalog_path);
        if (pipeline::method_needs_events(method))
            require_input("events file (--events)", events_path);
        std::optional<EmbeddingTable> images;
        if (pipeline::method_needs_images(method)) {
            require_input("image-vector file (--images)", images_path);
            images = load_table(images_path);
        }
        pipeline::Dataset dataset;
        if (pipeline::method_needs_events(method)) {
            dataset = pipeline::load_dataset(catalog_path, events_path, cfg);
        } else {
            dataset.catalog = Catalog(ingest::parse_catalog_file(catalog_path).records);
        }
        const std::string path = pipeline::train_to_dir(
            method, dataset, images ? &*images : nullptr, cfg, seed, common.out_dir);
        std::printf("wrote %s\n", path.c_str());
        return kExitOk;
    }

    if (unify_cmd->parsed()) {
        require_input("image-vector table (--images)", unify_images);
        require_input("word2vec table (--psv)", unify_psv);
        EmbeddingTable images = load_table(unify_images);
        EmbeddingTable psv = load_table(unify_psv);
        unify::UnifyConfig uc;
        uc.method = unify::parse_unify_method(cfg.get("unify", "method", "weighted_average"));
        uc.w_image = cfg.get_double("unify", "w_image", 0.1);
        uc.w_psv = cfg.get_double("unify", "w_psv", 0.9);
        uc.normalize_inputs = cfg.get_bool("unify", "normalize", true);
        fs::create_directories(common.out_dir);

        if (!grid_task.empty()) {
            pipeline::Task task = pipeline::parse_task(grid_task);
            require_input("catalog file (--catalog)", catalog_path);
            require_input("events file (--events)", events_path);
            pipeline::Dataset dataset = pipeline::load_dataset(catalog_path, events_path, cfg);
            pipeline::EvalInputs in;
            in.dataset = &dataset;
            in.reference = &psv; // pruning reference for clicked_purchased
            auto vt = pipeline::make_validation_task(task, in, cfg, seed);
            auto grid = unify::grid_search_weights(
                images, psv, vt, cfg.get_double("unify", "grid_step", 0.1));
            unify::write_grid_trace_csv(
                grid, (fs::path(common.out_dir) / (unify_name + "_grid.csv")).string());
            uc.w_image = grid.w_image;
            uc.w_psv = grid.w_psv;
            std::printf("grid search: w_image=%.3f w_psv=%.3f\n", grid.w_image, grid.w_psv);
        }

        EmbeddingTable unified =
            unify::unify(images, psv, uc, {unify_name, config::config_digest(cfg, seed)});
        const std::string path = (fs::path(common.out_dir) / (unify_name + ".embk")).string();
        save_table_binary(unified, path);
        write_table_metadata(unified, path);
        std::printf("wrote %s\n", path.c_str());
        return kExitOk;
    }

    if (eval_cmd->parsed()) {
        if (task_arg.empty()) throw ConfigError("eval: no task given");
        pipeline::Task task = pipeline::parse_task(task_arg);
        require_input("embedding table (--table)", table_path);
        require_input("catalog file (--catalog)", catalog_path);
        require_input("events file (--events)", events_path);
        EmbeddingTable table = load_table(table_path);
        check_digest(table, cfg, seed, common.force, table_path);

        pipeline::Dataset dataset = pipeline::load_dataset(catalog_path, events_path, cfg);
        pipeline::EvalInputs in;
        in.dataset = &dataset;
        in.table = &table;

        std::optional<EmbeddingTable> reference, user_table;
        if (task == pipeline::Task::clicked_purchased) {
            require_input("reference table (--reference)", reference_path);
            reference = load_table(reference_path);
            in.reference = &*reference;
        }
        synth::GroundTruth truth;
        if (task == pipeline::Task::returns) {
            if (!truth_path.empty()) {
                truth = synth::read_ground_truth_jsonl(truth_path);
                in.truth = &truth;
            }
            if (!user_table_path.empty()) {
                user_table = load_table(user_table_path);
                in.user_table = &*user_table;
            }
        }

        eval::EvalReport report = pipeline::run_eval_task(task, in, cfg, seed);
        fs::create_directories(common.out_dir);
        std::string stem = table.metadata().method.empty()
                               ? fs::path(table_path).stem().string()
                               : table.metadata().method;
        for (char& c : stem) c = c == '-' ? '_' : static_cast<char>(std::tolower(c));
        const std::string path =
            (fs::path(common.out_dir) / (pipeline::task_name(task) + "_" + stem + ".csv"))
                .string();
        eval::write_report_csv(report, path);
        std::printf("wrote %s\n", path.c_str());
        return kExitOk;
    }

    if (nb_cmd->parsed()) {
        require_input("embedding table (--table)", table_path);
        EmbeddingTable table = load_table(table_path);
        std::optional<Catalog> catalog;
        if (!catalog_path.empty()) {
            require_input("catalog file (--catalog)", catalog_path);
            catalog = Catalog(ingest::parse_catalog_file(catalog_path).records);
        }
        auto neighbors =
            top_k_neighbors(table, nb_token, static_cast<std::size_t>(nb_k), product_token_filter);
        for (const auto& nb : neighbors) {
            std::printf("%-16s %.4f", nb.token.c_str(), nb.similarity);
            if (catalog) {
                if (const ProductRecord* rec = catalog->find(nb.token)) {
                    std::printf("  [");
                    bool first = true;
                    for (const auto& si : rec->si_tokens()) {
                        if (si.key == SiKey::brand || si.key == SiKey::basecolor ||
                            si.key == SiKey::priceband) {
                            std::printf("%s%s", first ? "" : " ", si.canonical().c_str());
                            first = false;
                        }
                    }
                    std::printf("]");
                }
            }
            std::printf("\n");
        }
        return kExitOk;
    }

    if (full_cmd->parsed()) {
        auto written = pipeline::run_full(cfg, seed, common.out_dir);
        std::printf("wrote %zu files under %s\n", written.size(), common.out_dir.c_str());
        return kExitOk;
    }

    return kExitConfig;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
