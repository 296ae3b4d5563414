// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "rulegen/strutil.hpp"

namespace {

std::string random_text(std::size_t len, unsigned seed) {
    std::mt19937 rng(seed);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(static_cast<char>('a' + rng() % 26));
    }
    return out;
}

void BM_Levenshtein(benchmark::State& state) {
    auto len = static_cast<std::size_t>(state.range(0));
    std::string a = random_text(len, 1);
    std::string b = random_text(len, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rulegen::levenshtein(a, b));
    }
}
BENCHMARK(BM_Levenshtein)->Arg(32)->Arg(256)->Arg(1024);

void BM_NormalizeRuleText(benchmark::State& state) {
    std::string rule = "rule r { // c\n meta: a = \"v\" /* block */ strings: $a = \"x\" "
                       "condition: any of them }";
    for (auto _ : state) {
        benchmark::DoNotOptimize(rulegen::normalize_rule_text(rule));
    }
}
BENCHMARK(BM_NormalizeRuleText);

}  // namespace
