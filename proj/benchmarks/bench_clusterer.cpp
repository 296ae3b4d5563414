// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "rulegen/clusterer.hpp"
#include "rulegen/embedding.hpp"

namespace {

std::vector<rulegen::embed::CodeVector> random_vectors(std::size_t n, std::size_t dim) {
    std::mt19937 rng(3);
    std::vector<rulegen::embed::CodeVector> out(n);
    for (auto& v : out) {
        v.values.resize(dim);
        for (double& x : v.values) {
            x = static_cast<double>(rng() % 1000) / 1000.0;
        }
    }
    return out;
}

void BM_KMeans(benchmark::State& state) {
    auto vectors = random_vectors(static_cast<std::size_t>(state.range(0)), 64);
    for (auto _ : state) {
        auto clusters = rulegen::cluster::kmeans(vectors, 8, 42, 100);
        benchmark::DoNotOptimize(clusters);
    }
}
BENCHMARK(BM_KMeans)->Arg(100)->Arg(500);

void BM_HashedEmbedding(benchmark::State& state) {
    rulegen::embed::HashedBagEmbedder backend(256);
    rulegen::seg::CodeSegment segment;
    for (int i = 0; i < 512; ++i) {
        segment.tokens.push_back(
            {rulegen::seg::TokenKind::identifier, "token_" + std::to_string(i % 50), 0});
    }
    segment.token_count = segment.tokens.size();
    for (auto _ : state) {
        auto v = rulegen::embed::embed_segment(segment, backend);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_HashedEmbedding);

}  // namespace
