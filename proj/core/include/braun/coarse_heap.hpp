#pragma once

// Baseline: an array-backed binary heap behind a single mutex. Snapshots are
// full copies of the backing array.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace braun {

template <class T, class Compare = std::less<T>>
class CoarseHeap {
 public:
  CoarseHeap() = default;
  explicit CoarseHeap(Compare less) : less_(std::move(less)) {}

  CoarseHeap(CoarseHeap&& other) noexcept : less_(other.less_) {
    std::lock_guard lock(other.mu_);
    items_ = std::move(other.items_);
  }

  CoarseHeap& operator=(CoarseHeap&& other) noexcept {
    if (this != &other) {
      std::scoped_lock lock(mu_, other.mu_);
      items_ = std::move(other.items_);
      less_ = other.less_;
    }
    return *this;
  }

  CoarseHeap(const CoarseHeap&) = delete;
  CoarseHeap& operator=(const CoarseHeap&) = delete;

  void insert(T v) {
    Section s(*this);
    items_.push_back(std::move(v));
    sift_up(items_.size() - 1);
  }

  std::optional<T> remove_min() {
    Section s(*this);
    if (items_.empty()) return std::nullopt;
    T out = std::move(items_.front());
    if (items_.size() > 1) {
      items_.front() = std::move(items_.back());
      items_.pop_back();
      sift_down(0);
    } else {
      items_.pop_back();
    }
    return out;
  }

  std::optional<T> get_min() const {
    Section s(*this);
    if (items_.empty()) return std::nullopt;
    return items_.front();
  }

  // Theta(n): copies the whole array under the mutex.
  CoarseHeap snapshot() const {
    Section s(*this);
    CoarseHeap copy(less_);
    copy.items_ = items_;
    visits_.fetch_add(items_.size(), std::memory_order_relaxed);
    return copy;
  }

  // Strongly consistent: a copy of the array taken under the mutex.
  std::vector<T> iterate() const {
    Section s(*this);
    return items_;
  }

  std::size_t size() const {
    Section s(*this);
    return items_.size();
  }

  bool empty() const { return size() == 0; }

  // Quiescent check of the array heap property.
  bool is_heap() const {
    Section s(*this);
    for (std::size_t i = 1; i < items_.size(); ++i) {
      if (less_(items_[i], items_[(i - 1) / 2])) return false;
    }
    return true;
  }

  // Largest number of operation bodies ever observed running at once.
  int max_concurrent_sections() const noexcept { return max_inside_.load(std::memory_order_relaxed); }

  // Elements copied by snapshot() so far.
  std::size_t snapshot_visits() const noexcept { return visits_.load(std::memory_order_relaxed); }

  const Compare& comparator() const noexcept { return less_; }

 private:
  class Section {
   public:
    explicit Section(const CoarseHeap& h) : h_(h), lock_(h.mu_) {
      int now = h_.inside_.fetch_add(1, std::memory_order_relaxed) + 1;
      int seen = h_.max_inside_.load(std::memory_order_relaxed);
      while (now > seen && !h_.max_inside_.compare_exchange_weak(seen, now, std::memory_order_relaxed)) {
      }
    }
    ~Section() { h_.inside_.fetch_sub(1, std::memory_order_relaxed); }

   private:
    const CoarseHeap& h_;
    std::lock_guard<std::mutex> lock_;
  };

  void sift_up(std::size_t i) {
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!less_(items_[i], items_[parent])) break;
      std::swap(items_[i], items_[parent]);
      i = parent;
    }
  }

  void sift_down(std::size_t i) {
    const std::size_t n = items_.size();
    for (;;) {
      std::size_t smallest = i;
      std::size_t l = 2 * i + 1;
      std::size_t r = l + 1;
      if (l < n && less_(items_[l], items_[smallest])) smallest = l;
      if (r < n && less_(items_[r], items_[smallest])) smallest = r;
      if (smallest == i) return;
      std::swap(items_[i], items_[smallest]);
      i = smallest;
    }
  }

  mutable std::mutex mu_;
  std::vector<T> items_;
  [[no_unique_address]] Compare less_{};
  mutable std::atomic<int> inside_{0};
  mutable std::atomic<int> max_inside_{0};
  mutable std::atomic<std::size_t> visits_{0};
};

}  // namespace braun
