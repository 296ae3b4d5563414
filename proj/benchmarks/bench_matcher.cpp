// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "rulegen/matcher.hpp"
#include "rulegen/rex.hpp"
#include "rulegen/yara.hpp"

namespace {

std::string synthetic_source(std::size_t lines) {
    std::mt19937 rng(1);
    std::string out;
    for (std::size_t i = 0; i < lines; ++i) {
        switch (rng() % 4) {
            case 0: out += "value_" + std::to_string(i) + " = compute(" + std::to_string(i) + ")\n"; break;
            case 1: out += "import module_" + std::to_string(rng() % 20) + "\n"; break;
            case 2: out += "result = socket.gethostname()\n"; break;
            default: out += "print('line', " + std::to_string(i) + ")\n"; break;
        }
    }
    return out;
}

rulegen::rules::Rule bench_rule() {
    auto outcome = rulegen::yara::compile_yara(
        "rule bench { meta: d = \"b\" strings: $a = \"gethostname\" $b = \"getpass\" "
        "$r = /import module_[0-9]+/ condition: any of them }");
    return std::get<rulegen::rules::Rule>(std::move(outcome));
}

void BM_ScanFile(benchmark::State& state) {
    rulegen::corpus::SourceFile file;
    file.relative_path = "bench.py";
    file.content = synthetic_source(static_cast<std::size_t>(state.range(0)));
    auto rule = bench_rule();
    for (auto _ : state) {
        auto results = rulegen::match::scan_file({rule}, file, "bench");
        benchmark::DoNotOptimize(results);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * file.content.size()));
}
BENCHMARK(BM_ScanFile)->Arg(100)->Arg(1000)->Arg(5000);

void BM_RegexFindAll(benchmark::State& state) {
    auto pattern = rulegen::rex::Pattern::compile("https?://[a-z0-9.]+/[a-z.]+");
    std::string text = synthetic_source(1000) + "url = 'https://collect.example/api'\n";
    for (auto _ : state) {
        auto spans = pattern.find_all(text);
        benchmark::DoNotOptimize(spans);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_RegexFindAll);

}  // namespace

BENCHMARK_MAIN();
