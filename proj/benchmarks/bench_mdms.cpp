#include "mdms/mdms.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

mdms::MissingValueSeries walk(std::size_t n, double missing_share) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> step;
  std::bernoulli_distribution hide(missing_share);
  std::vector<double> v(n);
  double acc = 0.0;
  for (auto &x : v) {
    acc += step(rng);
    x = hide(rng) ? mdms::kMissing : acc;
  }
  return mdms::MissingValueSeries(std::move(v));
}

void BM_Mdms(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  const auto s = walk(n, static_cast<double>(state.range(2)) / 100.0);
  mdms::EngineConfig c;
  c.m = m;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdms::mdms(s, c));
  }
  const double pairs = static_cast<double>(n - m + 1) * static_cast<double>(n - m + 1);
  state.counters["pairs/s"] = benchmark::Counter(pairs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Mdms)
    ->Args({4096, 128, 0})
    ->Args({4096, 128, 20})
    ->Args({8192, 256, 20})
    ->Args({16384, 256, 20})
    ->Unit(benchmark::kMillisecond);

void BM_StompExact(benchmark::State &state) {
  const auto s = walk(static_cast<std::size_t>(state.range(0)), 0.0);
  mdms::EngineConfig c;
  c.m = 128;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdms::stomp_exact(s, c));
  }
}
BENCHMARK(BM_StompExact)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_WindowStats(benchmark::State &state) {
  const auto s = walk(static_cast<std::size_t>(state.range(0)), 0.2);
  for (auto _ : state) {
    const auto aux = mdms::build_auxiliary(s);
    benchmark::DoNotOptimize(mdms::compute_window_stats(s, aux, 256));
  }
}
BENCHMARK(BM_WindowStats)->Arg(1 << 16)->Arg(1 << 20);

void BM_RowAdvance(benchmark::State &state) {
  const auto s = walk(static_cast<std::size_t>(state.range(0)), 0.2);
  const auto aux = mdms::build_auxiliary(s);
  mdms::DotProductRow row(aux, 256);
  for (auto _ : state) {
    if (row.anchor() + 1 >= row.size()) {
      state.PauseTiming();
      row = mdms::DotProductRow(aux, 256);
      state.ResumeTiming();
    }
    row.advance(aux);
    benchmark::DoNotOptimize(row.stream(mdms::DotStream::qz).data());
  }
}
BENCHMARK(BM_RowAdvance)->Arg(16384);

} // namespace

BENCHMARK_MAIN();
