#pragma once

// Checkers and oracles for the heaps, plus the multi-threaded stress harness
// whose traces feed the conservation check.

#include <bit>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <latch>
#include <optional>
#include <set>
#include <span>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "braun/rng.hpp"

namespace braun {

using Value = std::int64_t;

// ---------------------------------------------------------------------------
// Structure checks. All of these read the tree without locks and are only
// meaningful at quiescence.

struct StructReport {
  bool is_braun = true;
  bool is_heap = true;
  std::size_t size = 0;
  std::size_t depth = 0;
  std::size_t shared_nodes = 0;
  std::uint64_t snap_count_total = 0;
};

// Depth limit implied by the Braun shape: ceil(log2(size + 1)).
constexpr std::size_t braun_depth_bound(std::size_t size) noexcept { return std::bit_width(size); }

namespace detail {

template <class N>
const N* left_of(const N& n) {
  if constexpr (requires { n.left(); }) {
    return n.left();
  } else {
    return n.left.get();
  }
}

template <class N>
const N* right_of(const N& n) {
  if constexpr (requires { n.right(); }) {
    return n.right();
  } else {
    return n.right.get();
  }
}

template <class N>
decltype(auto) value_of(const N& n) {
  if constexpr (requires { n.value(); }) {
    return n.value();
  } else {
    return (n.value);
  }
}

template <class N>
std::uint64_t snap_count_of(const N& n) {
  if constexpr (requires { n.snap_count(); }) {
    return n.snap_count();
  } else {
    return 0;
  }
}

// Subtree size, or nullopt as soon as any node breaks the Braun bound.
template <class N>
std::optional<std::size_t> braun_size(const N* n) {
  if (!n) return 0;
  auto l = braun_size(left_of(*n));
  if (!l) return std::nullopt;
  auto r = braun_size(right_of(*n));
  if (!r) return std::nullopt;
  if (*r > *l || *l > *r + 1) return std::nullopt;
  return *l + *r + 1;
}

template <class N, class Compare>
bool heap_ordered(const N* n, const Compare& less) {
  if (!n) return true;
  for (const N* c : {left_of(*n), right_of(*n)}) {
    if (!c) continue;
    if (less(value_of(*c), value_of(*n))) return false;
    if (!heap_ordered(c, less)) return false;
  }
  return true;
}

template <class N>
std::size_t tree_depth(const N* n) {
  if (!n) return 0;
  return 1 + std::max(tree_depth(left_of(*n)), tree_depth(right_of(*n)));
}

template <class N>
void count_nodes(const N* n, std::size_t& size, std::uint64_t& snaps) {
  if (!n) return;
  ++size;
  snaps += snap_count_of(*n);
  count_nodes(left_of(*n), size, snaps);
  count_nodes(right_of(*n), size, snaps);
}

template <class N>
void collect_reachable(const N* n, std::unordered_set<const N*>& seen) {
  if (!n || !seen.insert(n).second) return;
  collect_reachable(left_of(*n), seen);
  collect_reachable(right_of(*n), seen);
}

}  // namespace detail

template <class N>
bool check_braun(const N* root) {
  return detail::braun_size(root).has_value();
}

template <class N, class Compare = std::less<>>
bool check_heap(const N* root, const Compare& less = {}) {
  return detail::heap_ordered(root, less);
}

template <class N, class Compare = std::less<>>
StructReport inspect(const N* root, const Compare& less = {}) {
  StructReport r;
  r.is_braun = check_braun(root);
  r.is_heap = check_heap(root, less);
  r.depth = detail::tree_depth(root);
  detail::count_nodes(root, r.size, r.snap_count_total);
  return r;
}

// Several heaps that may share structure. size and snap_count_total count
// each distinct node once; shared_nodes counts nodes reachable from two or
// more of the roots.
template <class N, class Compare = std::less<>>
StructReport inspect_forest(std::span<const N* const> roots, const Compare& less = {}) {
  StructReport r;
  std::unordered_map<const N*, int> owners;
  for (const N* root : roots) {
    r.is_braun = r.is_braun && check_braun(root);
    r.is_heap = r.is_heap && check_heap(root, less);
    r.depth = std::max(r.depth, detail::tree_depth(root));
    std::unordered_set<const N*> seen;
    detail::collect_reachable(root, seen);
    for (const N* n : seen) ++owners[n];
  }
  r.size = owners.size();
  for (const auto& [n, k] : owners) {
    r.snap_count_total += detail::snap_count_of(*n);
    if (k >= 2) ++r.shared_nodes;
  }
  return r;
}

template <class Heap>
StructReport inspect_heap(const Heap& h) {
  return inspect(h.root_node(), h.comparator());
}

// ---------------------------------------------------------------------------
// Order-insensitive multiset digest: sum of per-element hashes plus count.

struct Digest {
  std::uint64_t sum = 0;
  std::size_t count = 0;

  template <class T>
  void add(const T& v) {
    sum += mix64(static_cast<std::uint64_t>(std::hash<T>{}(v)));
    ++count;
  }

  friend bool operator==(const Digest&, const Digest&) = default;
};

template <class Range>
Digest digest(Range&& values) {
  Digest d;
  for (const auto& v : values) d.add(v);
  return d;
}

// Digest of a heap's contents, read through its own (lock-aware) iterate().
template <class Heap>
Digest digest_of(const Heap& h) {
  auto stream = h.iterate();
  return digest(stream);
}

// True iff running `mutate` against `a` leaves the contents of `b` unchanged.
template <class Heap, class Fn>
bool check_isolation(Heap& a, const Heap& b, Fn&& mutate) {
  const Digest before = digest_of(b);
  std::forward<Fn>(mutate)(a);
  return digest_of(b) == before;
}

// ---------------------------------------------------------------------------
// Ground truth.

template <class T, class Compare = std::less<T>>
class OracleQueue {
 public:
  OracleQueue() = default;
  explicit OracleQueue(Compare less) : items_(std::move(less)) {}

  void insert(T v) { items_.insert(std::move(v)); }

  std::optional<T> get_min() const {
    if (items_.empty()) return std::nullopt;
    return *items_.begin();
  }

  std::optional<T> remove_min() {
    if (items_.empty()) return std::nullopt;
    auto it = items_.begin();
    T v = *it;
    items_.erase(it);
    return v;
  }

  std::size_t size() const noexcept { return items_.size(); }

  const std::multiset<T, Compare>& items() const noexcept { return items_; }

 private:
  std::multiset<T, Compare> items_;
};

// ---------------------------------------------------------------------------
// Traces.

enum class OpKind : std::uint8_t { kInsert, kRemoveMin, kGetMin, kSnapshot };

struct OpRecord {
  OpKind kind = OpKind::kInsert;
  Value input = 0;
  // remove_min/get_min result; for snapshots, the number of values the
  // snapshot's iterator produced.
  std::optional<Value> output;
  std::uint64_t start_ns = 0;
  std::uint64_t end_ns = 0;
};

struct OpTrace {
  std::vector<std::vector<OpRecord>> per_thread;
  std::vector<Value> initial;
  std::vector<Value> final_contents;
};

// inserted + initial == removed + final as multisets, and no value is
// removed more often than it was ever present.
bool check_conservation(const OpTrace& trace, std::span<const Value> final_contents);

// Replays a single-threaded trace against OracleQueue and compares every
// output exactly. Snapshot records must report the oracle's size.
bool replay_matches_oracle(const OpTrace& trace);

// `n` workload values in [0, bound), reproducible per seed.
std::vector<Value> workload_values(std::uint64_t seed, std::size_t n, Value bound);

struct OpMix {
  double insert = 0.5;
  double remove_min = 0.5;
  double get_min = 0.0;
  double snapshot = 0.0;
};

struct StressConfig {
  unsigned threads = 4;
  std::size_t ops_per_thread = 10'000;
  OpMix mix;
  std::uint64_t seed = 1;
  Value value_bound = Value{1} << 16;
  // Each thread keeps its latest snapshot alive until its next snapshot op,
  // so mutations run against shared structure.
  bool keep_snapshots = true;
};

template <class Heap>
struct StressRun {
  OpTrace trace;
  // Snapshots still held by the workers when they finished.
  std::vector<Heap> snapshots;
  // Every snapshot's iterator produced exactly size() values.
  bool snapshot_reads_consistent = true;
};

namespace detail {

inline std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                        std::chrono::steady_clock::now().time_since_epoch())
                                        .count());
}

inline OpKind pick(const OpMix& mix, double u) {
  const double total = mix.insert + mix.remove_min + mix.get_min + mix.snapshot;
  u *= total;
  if ((u -= mix.insert) < 0) return OpKind::kInsert;
  if ((u -= mix.remove_min) < 0) return OpKind::kRemoveMin;
  if ((u -= mix.get_min) < 0) return OpKind::kGetMin;
  return OpKind::kSnapshot;
}

template <class Heap>
std::vector<Value> contents_of(const Heap& h) {
  std::vector<Value> out;
  for (const auto& v : h.iterate()) out.push_back(v);
  return out;
}

}  // namespace detail

// Runs cfg.threads workers against `heap`. Generated inputs depend only on
// (seed, thread index); interleavings do not reproduce.
template <class Heap>
StressRun<Heap> run_stress(Heap& heap, const StressConfig& cfg) {
  StressRun<Heap> run;
  run.trace.initial = detail::contents_of(heap);
  run.trace.per_thread.resize(cfg.threads);

  std::vector<std::optional<Heap>> held(cfg.threads);
  std::vector<char> consistent(cfg.threads, 1);
  std::latch start(cfg.threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(cfg.threads);
    for (unsigned t = 0; t < cfg.threads; ++t) {
      workers.emplace_back([&, t] {
        CounterRng rng(cfg.seed, t);
        auto& log = run.trace.per_thread[t];
        log.reserve(cfg.ops_per_thread);
        start.arrive_and_wait();
        for (std::size_t i = 0; i < cfg.ops_per_thread; ++i) {
          OpRecord rec;
          rec.kind = detail::pick(cfg.mix, rng.unit());
          rec.input = static_cast<Value>(rng.below(static_cast<std::uint64_t>(cfg.value_bound)));
          rec.start_ns = detail::now_ns();
          switch (rec.kind) {
            case OpKind::kInsert:
              heap.insert(rec.input);
              break;
            case OpKind::kRemoveMin:
              rec.output = heap.remove_min();
              break;
            case OpKind::kGetMin:
              rec.output = heap.get_min();
              break;
            case OpKind::kSnapshot: {
              Heap snap = heap.snapshot();
              Value seen = 0;
              for ([[maybe_unused]] const auto& v : snap.iterate()) ++seen;
              if (static_cast<std::size_t>(seen) != snap.size()) consistent[t] = 0;
              rec.output = seen;
              if (cfg.keep_snapshots) held[t].emplace(std::move(snap));
              break;
            }
          }
          rec.end_ns = detail::now_ns();
          log.push_back(rec);
        }
      });
    }
  }

  for (unsigned t = 0; t < cfg.threads; ++t) {
    run.snapshot_reads_consistent = run.snapshot_reads_consistent && consistent[t];
    if (held[t]) run.snapshots.push_back(std::move(*held[t]));
  }
  run.trace.final_contents = detail::contents_of(heap);
  return run;
}

}  // namespace braun
