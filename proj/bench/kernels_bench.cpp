// Serial reference kernels against their OpenMP counterparts at the shapes
// one training step uses (batch 128 with batch negatives, d = 32).

#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "relnn/kernels.hpp"

namespace {

using relnn::kernels::BagView;

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

struct GemmShape {
  std::size_t n, p, q;
};

GemmShape shape_of(const benchmark::State& state) {
  return {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)),
          static_cast<std::size_t>(state.range(2))};
}

template <auto Kernel>
void BM_Gemm(benchmark::State& state) {
  const auto [n, p, q] = shape_of(state);
  const auto a = random_vec(n * p, 1), b = random_vec(p * q, 2);
  std::vector<float> c(n * q);
  for (auto _ : state) {
    Kernel(n, p, q, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOPS"] = benchmark::Counter(
      2.0 * static_cast<double>(n * p * q), benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::kIs1000);
}

template <auto Kernel>
void BM_GemmAtB(benchmark::State& state) {
  const auto [n, p, q] = shape_of(state);
  const auto a = random_vec(n * p, 1), b = random_vec(n * q, 2);
  std::vector<float> c(p * q);
  for (auto _ : state) {
    Kernel(n, p, q, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOPS"] = benchmark::Counter(
      2.0 * static_cast<double>(n * p * q), benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::kIs1000);
}

struct Bags {
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets{0};

  Bags(std::size_t count, std::size_t vocab) {
    std::mt19937_64 rng(3);
    for (std::size_t b = 0; b < count; ++b) {
      const std::size_t len = 3 + rng() % 13;
      for (std::size_t i = 0; i < len; ++i) ids.push_back(static_cast<std::uint32_t>(rng() % vocab));
      offsets.push_back(ids.size());
    }
  }
  BagView view() const { return {ids, offsets}; }
};

constexpr std::size_t kVocab = 30000;
constexpr std::size_t kDim = 32;

template <auto Kernel>
void BM_EmbedBag(benchmark::State& state) {
  const Bags bags(static_cast<std::size_t>(state.range(0)), kVocab);
  const auto table = random_vec(kVocab * kDim, 4);
  std::vector<float> out(bags.view().size() * kDim);
  for (auto _ : state) {
    Kernel(bags.view(), table.data(), kDim, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void BM_EmbedBagBackward(benchmark::State& state) {
  const Bags bags(static_cast<std::size_t>(state.range(0)), kVocab);
  const auto grad = random_vec(bags.view().size() * kDim, 5);
  std::vector<float> table_grad(kVocab * kDim);
  for (auto _ : state) {
    Kernel(bags.view(), grad.data(), kDim, kVocab, table_grad.data());
    benchmark::DoNotOptimize(table_grad.data());
  }
}

namespace serial = relnn::kernels::serial;
namespace parallel = relnn::kernels::parallel;

// Stacked batch-negative rows through the 64 -> 128 -> 64 head.
void gemm_shapes(benchmark::internal::Benchmark* b) {
  b->Args({16384, 128, 64})->Args({16384, 64, 1})->Args({384, 32, 128})->Args({128, 128, 128});
}

BENCHMARK(BM_Gemm<serial::gemm<float>>)->Apply(gemm_shapes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Gemm<parallel::gemm<float>>)->Apply(gemm_shapes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GemmAtB<serial::gemm_at_b<float>>)
    ->Args({16384, 128, 64})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GemmAtB<parallel::gemm_at_b<float>>)
    ->Args({16384, 128, 64})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EmbedBag<serial::embed_bag<float>>)->Arg(384)->Arg(4096);
BENCHMARK(BM_EmbedBag<parallel::embed_bag<float>>)->Arg(384)->Arg(4096);
BENCHMARK(BM_EmbedBagBackward<serial::embed_bag_backward<float>>)->Arg(384)->Arg(4096);
BENCHMARK(BM_EmbedBagBackward<parallel::embed_bag_backward<float>>)->Arg(384)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
