#include <benchmark/benchmark.h>

#include "embkit/embedding.hpp"
#include "embkit/rng.hpp"

using namespace embkit;

namespace {

EmbeddingTable random_table(std::size_t n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        EmbeddingVector v(dim);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        entries.emplace_back("p" + std::to_string(i), std::move(v));
    }
    return EmbeddingTable(dim, std::move(entries));
}

void BM_cosine(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    Rng rng(1);
    EmbeddingVector a(dim), b(dim);
    for (auto& x : a) x = static_cast<float>(rng.normal());
    for (auto& x : b) x = static_cast<float>(rng.normal());
    for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity(a, b));
}
BENCHMARK(BM_cosine)->Arg(32)->Arg(100)->Arg(256);

void BM_top_k_neighbors(benchmark::State& state) {
    auto table = random_table(static_cast<std::size_t>(state.range(0)), 100, 2);
    for (auto _ : state) benchmark::DoNotOptimize(top_k_neighbors(table, "p0", 10));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_top_k_neighbors)->Arg(1000)->Arg(5000)->Arg(20000);

} // namespace
