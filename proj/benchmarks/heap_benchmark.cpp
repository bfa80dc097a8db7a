#include <benchmark/benchmark.h>

#include <memory>

#include "braun/coarse_heap.hpp"
#include "braun/concurrent_heap.hpp"
#include "braun/verification.hpp"

namespace {

using braun::Value;

template <class Heap>
void fill(Heap& h, std::size_t n, std::uint64_t seed = 7) {
  for (Value v : braun::workload_values(seed, n, Value{1} << 32)) h.insert(v);
}

template <class Heap>
void BM_Insert(benchmark::State& state) {
  Heap h;
  fill(h, static_cast<std::size_t>(state.range(0)));
  braun::CounterRng rng(11, 0);
  for (auto _ : state) h.insert(static_cast<Value>(rng.below(Value{1} << 32)));
  state.SetItemsProcessed(state.iterations());
}

template <class Heap>
void BM_InsertRemove(benchmark::State& state) {
  Heap h;
  fill(h, static_cast<std::size_t>(state.range(0)));
  braun::CounterRng rng(13, 0);
  for (auto _ : state) {
    h.insert(static_cast<Value>(rng.below(Value{1} << 32)));
    benchmark::DoNotOptimize(h.remove_min());
  }
  state.SetItemsProcessed(2 * state.iterations());
}

template <class Heap>
void BM_Snapshot(benchmark::State& state) {
  Heap h;
  fill(h, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto s = h.snapshot();
    benchmark::DoNotOptimize(&s);
  }
}

// Shared heap hammered by all benchmark threads.
template <class Heap>
void BM_ConcurrentInsert(benchmark::State& state) {
  static std::unique_ptr<Heap> shared;
  if (state.thread_index() == 0) {
    shared = std::make_unique<Heap>();
    fill(*shared, std::size_t{1} << 16);
  }
  braun::CounterRng rng(17, static_cast<std::uint64_t>(state.thread_index()));
  for (auto _ : state) shared->insert(static_cast<Value>(rng.below(Value{1} << 32)));
  state.SetItemsProcessed(state.iterations());
  if (state.thread_index() == 0) shared.reset();
}

using Braun = braun::BraunHeap<Value>;
using Coarse = braun::CoarseHeap<Value>;

BENCHMARK_TEMPLATE(BM_Insert, Braun)->Arg(1 << 16);
BENCHMARK_TEMPLATE(BM_Insert, Coarse)->Arg(1 << 16);
BENCHMARK_TEMPLATE(BM_InsertRemove, Braun)->Arg(1 << 16);
BENCHMARK_TEMPLATE(BM_InsertRemove, Coarse)->Arg(1 << 16);
BENCHMARK_TEMPLATE(BM_Snapshot, Braun)->RangeMultiplier(16)->Range(1 << 10, 1 << 18);
BENCHMARK_TEMPLATE(BM_Snapshot, Coarse)->RangeMultiplier(16)->Range(1 << 10, 1 << 18);
BENCHMARK_TEMPLATE(BM_ConcurrentInsert, Braun)->ThreadRange(1, 8)->UseRealTime();
BENCHMARK_TEMPLATE(BM_ConcurrentInsert, Coarse)->ThreadRange(1, 8)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
