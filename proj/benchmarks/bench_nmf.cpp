#include <benchmark/benchmark.h>

#include "embkit/mf.hpp"
#include "embkit/rng.hpp"

using namespace embkit;
using namespace embkit::mf;

namespace {

InteractionMatrix random_sparse(std::size_t rows, std::size_t cols, std::size_t nnz,
                                std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<std::pair<std::string, std::string>, double>> triples;
    triples.reserve(nnz);
    for (std::size_t i = 0; i < nnz; ++i)
        triples.push_back({{"u" + std::to_string(rng.index(rows)),
                            "p" + std::to_string(rng.index(cols))},
                           1.0 + static_cast<double>(rng.index(8))});
    return InteractionMatrix::from_triples(triples);
}

void BM_nmf(benchmark::State& state) {
    auto m = random_sparse(1000, 400, 20000, 7);
    NmfConfig cfg;
    cfg.max_iters = static_cast<int>(state.range(0));
    cfg.rel_tol = 0.0;
    for (auto _ : state) benchmark::DoNotOptimize(nmf_factorize(m, 32, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_nmf)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_bpr_epoch(benchmark::State& state) {
    auto m = random_sparse(800, 400, 12000, 8);
    BprConfig cfg;
    cfg.dim = static_cast<int>(state.range(0));
    cfg.epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(bpr_train(m, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.nnz()));
}
BENCHMARK(BM_bpr_epoch)->Arg(32)->Arg(100)->Unit(benchmark::kMillisecond);

} // namespace
