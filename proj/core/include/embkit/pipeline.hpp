#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "embkit/config.hpp"
#include "embkit/dae.hpp"
#include "embkit/embedding.hpp"
#include "embkit/eval.hpp"
#include "embkit/ingest.hpp"
#include "embkit/synth.hpp"
#include "embkit/types.hpp"
#include "embkit/unify.hpp"

namespace embkit::pipeline {

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

enum class Method {
    bpr_mf,
    dae,
    ie,
    p2v,
    psi2v,
    dwp2v,
    dwpsi2v,
    upsii2v,
    udwpsii2v,
};

inline constexpr std::array<Method, 9> kAllMethods = {
    Method::bpr_mf, Method::dae,     Method::ie,      Method::p2v,      Method::psi2v,
    Method::dwp2v,  Method::dwpsi2v, Method::upsii2v, Method::udwpsii2v};

std::string method_name(Method m);      // display name: "BPR-MF", "P2V", ...
std::string method_file_stem(Method m); // file stem: "bpr_mf", "p2v", ...
Method parse_method(const std::string& name);

/// Whether the method consumes the precomputed image-vector store.
bool method_needs_images(Method m);
/// Whether the method consumes the event log.
bool method_needs_events(Method m);

// ---------------------------------------------------------------------------
// Data loading
// ---------------------------------------------------------------------------

struct Dataset {
    Catalog catalog;
    std::vector<Event> events;
    std::vector<Session> sessions;
    std::vector<LifetimeList> lifetime_lists;
};

/// Parses catalog + events and builds sessions and lifetime lists
/// ([ingest] min_purchases, default 3).
Dataset load_dataset(const std::string& catalog_path, const std::string& events_path,
                     const config::KeyValueConfig& cfg);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainOutput {
    EmbeddingTable table;
    std::vector<double> loss_trace;              // empty for IE and unified methods
    std::optional<EmbeddingTable> user_table;    // BPR-MF user factors
    std::optional<dae::DaeModel> dae_model;      // persisted alongside the DAE table
    std::optional<dae::OneHotLayout> dae_layout;
};

/// Trains one method. `images` is required for IE and the unified methods;
/// `cache` lets unified methods reuse already-trained base tables.
TrainOutput train_method(Method method, const Dataset& dataset, const EmbeddingTable* images,
                         const config::KeyValueConfig& cfg, std::uint64_t seed,
                         const std::map<Method, const EmbeddingTable*>* cache = nullptr);

/// Event-selection contract per method: non-DeepWalk word2vec variants see
/// bag+purchase only (via lifetime lists); DeepWalk variants and BPR-MF see
/// all events.
std::vector<std::vector<std::string>> deepwalk_sessions(const Dataset& dataset,
                                                        const config::KeyValueConfig& cfg,
                                                        std::uint64_t seed);

void write_loss_csv(const std::vector<double>& trace, const std::string& path);

// ---------------------------------------------------------------------------
// File-level steps (shared by the CLI and run_full)
// ---------------------------------------------------------------------------

struct SynthFiles {
    std::string catalog, events, truth, images;
};

SynthFiles synth_to_dir(const config::KeyValueConfig& cfg, std::uint64_t seed,
                        const std::string& out_dir);

synth::WorldConfig world_config_from(const config::KeyValueConfig& cfg, std::uint64_t seed);

/// Trains and persists one method's artifacts under out_dir; returns the
/// table path. Also writes the loss trace and, for BPR-MF, the user table.
std::string train_to_dir(Method method, const Dataset& dataset, const EmbeddingTable* images,
                         const config::KeyValueConfig& cfg, std::uint64_t seed,
                         const std::string& out_dir,
                         const std::map<Method, const EmbeddingTable*>* cache = nullptr);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

enum class Task { attributes, clicked_purchased, sparsity, returns };

inline constexpr std::array<Task, 4> kAllTasks = {Task::attributes, Task::clicked_purchased,
                                                  Task::sparsity, Task::returns};

std::string task_name(Task t);
Task parse_task(const std::string& name);

struct EvalInputs {
    const Dataset* dataset = nullptr;
    const EmbeddingTable* table = nullptr;
    const EmbeddingTable* reference = nullptr;  // clicked_purchased pruning table
    const synth::GroundTruth* truth = nullptr;  // returns labels (synthetic mode)
    const EmbeddingTable* user_table = nullptr; // optional user vectors
};

eval::EvalReport run_eval_task(Task task, const EvalInputs& inputs,
                               const config::KeyValueConfig& cfg, std::uint64_t seed);

/// Scalar validation metric for grid search: attributes = mean brand
/// precision@10; sparsity = HR@10; clicked_purchased = median rank at
/// position 1 (lower is better).
unify::ValidationTask make_validation_task(Task task, const EvalInputs& inputs,
                                           const config::KeyValueConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Whole pipeline (determinism surface)
// ---------------------------------------------------------------------------

/// synth -> train all nine methods -> unify -> eval every task for every
/// method. Returns the sorted list of files written under out_dir.
std::vector<std::string> run_full(const config::KeyValueConfig& cfg, std::uint64_t seed,
                                  const std::string& out_dir);

} // namespace embkit::pipeline
