#pragma once

// Instrumentation policies for BraunHeap. NullProbe compiles away entirely;
// CountingProbe keeps process-wide counters and a per-thread lock-order
// recorder for tests and the bench tool's --verify mode.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <vector>

namespace braun {

struct NullProbe {
  static constexpr bool kEnabled = false;
  static constexpr bool kCopyOnWrite = true;

  static void node_allocated() noexcept {}
  static void peel_copy() noexcept {}
  static void node_visited() noexcept {}
  static void pull_up_finished() noexcept {}
  static void acquired(int /*depth*/, bool /*fresh*/) noexcept {}
  static void released(int /*depth*/) noexcept {}
};

struct ProbeCounters {
  std::uint64_t nodes_allocated = 0;
  std::uint64_t peel_copies = 0;
  std::uint64_t node_visits = 0;
  std::uint64_t lock_order_violations = 0;
  // Value of peel_copies when the most recent pull-up phase finished.
  std::uint64_t peel_copies_at_pull_up = 0;
};

struct CountingProbe {
  static constexpr bool kEnabled = true;
  static constexpr bool kCopyOnWrite = true;

  static void node_allocated() noexcept { bump(allocated_); }
  static void peel_copy() noexcept { bump(peels_); }
  static void node_visited() noexcept { bump(visits_); }
  static void pull_up_finished() noexcept {
    pull_up_mark_.store(peels_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  }

  // Permits must be taken in strictly increasing depth (heap permit = 0,
  // root = 1, ...). A freshly allocated node is private to the thread, so
  // locking it is exempt from the ordering check.
  static void acquired(int depth, bool fresh) noexcept {
    auto& held = held_depths();
    if (!fresh && !held.empty() && *std::max_element(held.begin(), held.end()) >= depth) {
      bump(violations_);
    }
    held.push_back(depth);
  }

  static void released(int depth) noexcept {
    auto& held = held_depths();
    auto it = std::find(held.rbegin(), held.rend(), depth);
    if (it != held.rend()) held.erase(std::next(it).base());
  }

  static ProbeCounters counters() noexcept {
    ProbeCounters c;
    c.nodes_allocated = allocated_.load(std::memory_order_relaxed);
    c.peel_copies = peels_.load(std::memory_order_relaxed);
    c.node_visits = visits_.load(std::memory_order_relaxed);
    c.lock_order_violations = violations_.load(std::memory_order_relaxed);
    c.peel_copies_at_pull_up = pull_up_mark_.load(std::memory_order_relaxed);
    return c;
  }

  static void reset() noexcept {
    allocated_.store(0, std::memory_order_relaxed);
    peels_.store(0, std::memory_order_relaxed);
    visits_.store(0, std::memory_order_relaxed);
    violations_.store(0, std::memory_order_relaxed);
    pull_up_mark_.store(0, std::memory_order_relaxed);
  }

 private:
  static void bump(std::atomic<std::uint64_t>& c) noexcept { c.fetch_add(1, std::memory_order_relaxed); }

  static std::vector<int>& held_depths() noexcept {
    thread_local std::vector<int> held;
    return held;
  }

  static inline std::atomic<std::uint64_t> allocated_{0};
  static inline std::atomic<std::uint64_t> peels_{0};
  static inline std::atomic<std::uint64_t> visits_{0};
  static inline std::atomic<std::uint64_t> violations_{0};
  static inline std::atomic<std::uint64_t> pull_up_mark_{0};
};

// Copy-on-write switched off: shared nodes are mutated in place. Only for
// checking that the isolation checker can detect a leak.
struct BrokenCowProbe : CountingProbe {
  static constexpr bool kCopyOnWrite = false;
};

}  // namespace braun
