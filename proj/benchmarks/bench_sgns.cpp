#include <benchmark/benchmark.h>

#include "embkit/rng.hpp"
#include "embkit/sgns.hpp"

using namespace embkit;
using namespace embkit::sgns;

namespace {

std::vector<std::vector<std::string>> random_lists(std::size_t n_lists, std::size_t len,
                                                   std::size_t vocab, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<std::string>> lists(n_lists);
    for (auto& list : lists) {
        list.reserve(len);
        for (std::size_t i = 0; i < len; ++i)
            list.push_back("p" + std::to_string(rng.index(vocab)));
    }
    return lists;
}

void BM_pair_generation(benchmark::State& state) {
    auto lists = random_lists(200, static_cast<std::size_t>(state.range(0)), 500, 3);
    auto source = prod2vec_source(lists);
    std::size_t pairs = 0;
    for (auto _ : state) {
        pairs = source.for_each([](std::string_view, std::string_view) {}).pairs;
        benchmark::DoNotOptimize(pairs);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs));
}
BENCHMARK(BM_pair_generation)->Arg(8)->Arg(16)->Arg(32);

void BM_sgns_epoch(benchmark::State& state) {
    auto lists = random_lists(500, 10, 800, 4);
    SgnsConfig cfg;
    cfg.dimension = static_cast<int>(state.range(0));
    cfg.epochs = 1;
    cfg.seed = 5;
    auto source = prod2vec_source(lists);
    std::size_t pairs = 500 * 10 * 9;
    for (auto _ : state) benchmark::DoNotOptimize(sgns_train(source, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs));
}
BENCHMARK(BM_sgns_epoch)->Arg(32)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_negative_sampler(benchmark::State& state) {
    Rng rng(6);
    std::vector<std::pair<std::string, double>> counts;
    for (int i = 0; i < 10000; ++i)
        counts.emplace_back("p" + std::to_string(i), 1.0 + rng.index(500));
    UnigramSampler sampler(std::move(counts), 0.75);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.sample_index(rng));
}
BENCHMARK(BM_negative_sampler);

} // namespace
