#include <benchmark/benchmark.h>

#include "camref/embeddings.hpp"
#include "camref/kernels.hpp"

namespace {

camref::EmbeddingSet make_set(std::size_t ids) {
    camref::SyntheticSpec spec;
    spec.num_identities = static_cast<std::uint32_t>(ids);
    spec.cameras = 6;
    spec.images_per_identity_per_camera = 4;
    spec.dim = 64;
    return camref::generate_synthetic(spec);
}

void BM_CosineDistanceParallel(benchmark::State& state) {
    const auto set = make_set(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(camref::kernels::cosine_distance(set.features()));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(set.size() * set.size() / 2));
}

void BM_CosineDistanceSerial(benchmark::State& state) {
    const auto set = make_set(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(camref::kernels::serial::cosine_distance(set.features()));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(set.size() * set.size() / 2));
}

void BM_AffineNormalizeParallel(benchmark::State& state) {
    const auto set = make_set(static_cast<std::size_t>(state.range(0)));
    camref::Matrix w(set.dim(), set.dim(), 0.01);
    std::vector<double> b(set.dim(), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(camref::kernels::affine_normalize(set.features(), w, b));
}

void BM_AffineNormalizeSerial(benchmark::State& state) {
    const auto set = make_set(static_cast<std::size_t>(state.range(0)));
    camref::Matrix w(set.dim(), set.dim(), 0.01);
    std::vector<double> b(set.dim(), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(camref::kernels::serial::affine_normalize(set.features(), w, b));
}

void BM_RankQueriesParallel(benchmark::State& state) {
    const auto set = make_set(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(camref::kernels::rank_queries(set.features(), set.camera_ids(), set.identities(),
                                                               set.features(), set.camera_ids(), set.identities()));
}

void BM_RankQueriesSerial(benchmark::State& state) {
    const auto set = make_set(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(camref::kernels::serial::rank_queries(
            set.features(), set.camera_ids(), set.identities(), set.features(), set.camera_ids(), set.identities()));
}

} // namespace

BENCHMARK(BM_CosineDistanceParallel)->Arg(25)->Arg(100);
BENCHMARK(BM_CosineDistanceSerial)->Arg(25)->Arg(100);
BENCHMARK(BM_AffineNormalizeParallel)->Arg(100);
BENCHMARK(BM_AffineNormalizeSerial)->Arg(100);
BENCHMARK(BM_RankQueriesParallel)->Arg(25)->Arg(100);
BENCHMARK(BM_RankQueriesSerial)->Arg(25)->Arg(100);

BENCHMARK_MAIN();
