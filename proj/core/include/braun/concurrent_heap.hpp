#pragma once

// Concurrent Braun heap with hand-over-hand locking and O(1) lazy
// copy-on-write snapshots.
//
// Structure
//   Each node carries a reader-writer permit and a snapshot count. A node with
//   a positive snapshot count is shared with another heap and is never
//   mutated in place: the writer "peels" it into a private copy that links the
//   same children, bumping their counts. Links are shared_ptr, so a node lives
//   exactly as long as some heap or node still points at it.
//
// Locking
//   Permits are taken leafward only: heap permit, then root, then one level
//   deeper at a time, with the child's permit acquired before the parent's is
//   released. Nodes never change depth, so the order is global and
//   deadlock-free. remove_min keeps the heap and root permits across the
//   whole pull-up phase and keeps the root permit into push-down, which is
//   what makes the transient heap-order violation unobservable.

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "braun/probe.hpp"

namespace braun {

namespace detail {

// Owned shared or exclusive hold on a reader-writer mutex, reported to the
// probe with the tree depth of what it guards.
template <class Probe>
class Permit {
 public:
  enum class Mode : std::uint8_t { kShared, kExclusive };

  Permit() noexcept = default;
  Permit(std::shared_mutex& mu, int depth, Mode mode, bool fresh = false)
      : mu_(&mu), depth_(depth), mode_(mode) {
    Probe::acquired(depth, fresh);
    if (mode == Mode::kExclusive) {
      mu.lock();
    } else {
      mu.lock_shared();
    }
  }

  Permit(Permit&& o) noexcept
      : mu_(std::exchange(o.mu_, nullptr)), depth_(o.depth_), mode_(o.mode_) {}

  Permit& operator=(Permit&& o) noexcept {
    if (this != &o) {
      unlock();
      mu_ = std::exchange(o.mu_, nullptr);
      depth_ = o.depth_;
      mode_ = o.mode_;
    }
    return *this;
  }

  Permit(const Permit&) = delete;
  Permit& operator=(const Permit&) = delete;

  ~Permit() { unlock(); }

  void unlock() noexcept {
    if (!mu_) return;
    if (mode_ == Mode::kExclusive) {
      mu_->unlock();
    } else {
      mu_->unlock_shared();
    }
    Probe::released(depth_);
    mu_ = nullptr;
  }

  bool owns() const noexcept { return mu_ != nullptr; }

 private:
  std::shared_mutex* mu_ = nullptr;
  int depth_ = 0;
  Mode mode_ = Mode::kExclusive;
};

}  // namespace detail

// Specialized by tests to reach internals (tree construction, single phases).
template <class Heap>
struct HeapTestAccess;

template <class T, class Compare = std::less<T>, class Probe = NullProbe>
class BraunHeap {
 public:
  using value_type = T;
  using probe_type = Probe;

  class Node {
   public:
    Node(T v, std::shared_ptr<Node> l, std::shared_ptr<Node> r)
        : value_(std::move(v)), left_(std::move(l)), right_(std::move(r)) {}

    // Unsynchronized accessors for quiescent inspection only.
    const T& value() const noexcept { return value_; }
    const Node* left() const noexcept { return left_.get(); }
    const Node* right() const noexcept { return right_.get(); }
    std::uint32_t snap_count() const noexcept { return snap_count_; }

   private:
    friend class BraunHeap;
    friend struct HeapTestAccess<BraunHeap>;

    T value_;
    std::shared_ptr<Node> left_;
    std::shared_ptr<Node> right_;
    std::uint32_t snap_count_ = 0;
    mutable std::shared_mutex mu_;
  };

  class Stream;

  BraunHeap() = default;
  explicit BraunHeap(Compare less) : less_(std::move(less)) {}

  BraunHeap(BraunHeap&& other) noexcept : less_(other.less_) {
    std::unique_lock lock(other.mu_);
    root_ = std::move(other.root_);
    size_ = std::exchange(other.size_, 0);
  }

  BraunHeap& operator=(BraunHeap&& other) noexcept {
    if (this == &other) return *this;
    Link incoming;
    std::size_t n = 0;
    {
      std::unique_lock lock(other.mu_);
      incoming = std::move(other.root_);
      n = std::exchange(other.size_, 0);
    }
    release();
    std::unique_lock lock(mu_);
    root_ = std::move(incoming);
    size_ = n;
    less_ = other.less_;
    return *this;
  }

  BraunHeap(const BraunHeap&) = delete;
  BraunHeap& operator=(const BraunHeap&) = delete;

  ~BraunHeap() { release(); }

  void insert(T v) {
    Permit heap(mu_, kHeapDepth, Mode::kExclusive);
    ++size_;
    if (!root_) {
      root_ = make_node(std::move(v));
      return;
    }
    auto [t, held] = make_writable(root_, kRootDepth);
    heap.unlock();

    int depth = kRootDepth;
    for (;;) {
      if (less_(v, t->value_)) std::swap(v, t->value_);
      // t' = {min, old right carrying max, old left}
      if (!t->right_) {
        t->right_ = std::move(t->left_);
        t->left_ = make_node(std::move(v));
        return;
      }
      auto [child, child_permit] = make_writable(t->right_, depth + 1);
      std::swap(t->left_, t->right_);
      held = std::move(child_permit);
      t = child;
      ++depth;
    }
  }

  std::optional<T> get_min() const {
    Permit heap(mu_, kHeapDepth, Mode::kShared);
    if (!root_) return std::nullopt;
    Node* root = root_.get();
    Permit r(root->mu_, kRootDepth, Mode::kShared);
    Probe::node_visited();
    heap.unlock();
    return root->value_;
  }

  std::optional<T> remove_min() {
    Permit heap(mu_, kHeapDepth, Mode::kExclusive);
    if (!root_) return std::nullopt;
    --size_;
    Permit root_permit(root_->mu_, kRootDepth, Mode::kExclusive);
    Probe::node_visited();

    if (!root_->left_) {
      std::optional<T> out = take_leaf_value(*root_);
      root_permit.unlock();
      Link dropped = std::move(root_);
      heap.unlock();
      return out;
    }

    Node* root = peel(root_, root_permit, kRootDepth);
    std::optional<T> out = std::move(root->value_);
    // Phase 1 keeps both the heap and the root permit; nobody can observe the
    // root until its replacement value is in place and push-down has it.
    root->value_ = pull_up_left(root);
    Probe::pull_up_finished();
    heap.unlock();
    push_down(root, std::move(root_permit));
    return out;
  }

  // O(1): bumps the root's snapshot count and shares the root.
  BraunHeap snapshot() const {
    Permit heap(mu_, kHeapDepth, Mode::kExclusive);
    if (!root_) return BraunHeap(less_);
    Permit r(root_->mu_, kRootDepth, Mode::kExclusive);
    Probe::node_visited();
    assert(root_->snap_count_ < std::numeric_limits<std::uint32_t>::max());
    ++root_->snap_count_;
    return BraunHeap(root_, size_, less_);
  }

  // Drops this handle's reference to its root. Only the root's count is
  // decremented; counts deeper down that were added by peeling stay as they
  // are and at worst cause an extra copy later. The heap is empty afterwards.
  void release() noexcept {
    Link dropped;
    Permit heap(mu_, kHeapDepth, Mode::kExclusive);
    if (!root_) return;
    {
      Permit r(root_->mu_, kRootDepth, Mode::kExclusive);
      if (root_->snap_count_ > 0) --root_->snap_count_;
    }
    dropped = std::move(root_);
    size_ = 0;
    heap.unlock();
  }

  // Preorder over a private snapshot taken now.
  Stream iterate() const { return Stream(snapshot()); }

  std::size_t size() const {
    Permit heap(mu_, kHeapDepth, Mode::kShared);
    return size_;
  }

  bool empty() const { return size() == 0; }

  const Compare& comparator() const noexcept { return less_; }

  // Unsynchronized: callers must guarantee no operation is in flight.
  const Node* root_node() const noexcept { return root_.get(); }

 private:
  friend struct HeapTestAccess<BraunHeap>;

  using Link = std::shared_ptr<Node>;
  using Permit = detail::Permit<Probe>;
  using Mode = typename Permit::Mode;

  static constexpr int kHeapDepth = 0;
  static constexpr int kRootDepth = 1;

  BraunHeap(Link root, std::size_t size, Compare less)
      : root_(std::move(root)), size_(size), less_(std::move(less)) {}

  static Link make_node(T v, Link l = nullptr, Link r = nullptr) {
    Probe::node_allocated();
    return std::make_shared<Node>(std::move(v), std::move(l), std::move(r));
  }

  // Locks the node behind `slot` exclusively and returns a writable version of
  // it. The caller must hold whatever guards `slot` itself.
  std::pair<Node*, Permit> make_writable(Link& slot, int depth) {
    Permit p(slot->mu_, depth, Mode::kExclusive);
    Probe::node_visited();
    Node* n = peel(slot, p, depth);
    return {n, std::move(p)};
  }

  // `held` must be the exclusive permit of *slot. If the node is shared,
  // replaces it in `slot` by a private copy whose children gain one snapshot
  // reference each; `held` moves to the copy before the original is unlocked.
  Node* peel(Link& slot, Permit& held, int depth) {
    Node* n = slot.get();
    if (n->snap_count_ == 0 || !Probe::kCopyOnWrite) return n;

    Link copy = make_node(n->value_, n->left_, n->right_);
    retain(n->left_, depth + 1);
    retain(n->right_, depth + 1);
    --n->snap_count_;
    Probe::peel_copy();

    held = Permit(copy->mu_, depth, Mode::kExclusive, /*fresh=*/true);
    slot = std::move(copy);
    return slot.get();
  }

  static void retain(const Link& child, int depth) {
    if (!child) return;
    Permit p(child->mu_, depth, Mode::kExclusive);
    assert(child->snap_count_ < std::numeric_limits<std::uint32_t>::max());
    ++child->snap_count_;
  }

  // Detaching a leaf: the caller holds its permit.
  static T take_leaf_value(Node& leaf) {
    if (leaf.snap_count_ > 0) {
      --leaf.snap_count_;
      return leaf.value_;
    }
    return std::move(leaf.value_);
  }

  // Phase 1 of remove_min. `top` is the writable, non-leaf root; its permit
  // stays with the caller for the whole descent.
  T pull_up_left(Node* top) {
    Node* t = top;
    Permit held;
    int depth = kRootDepth;
    for (;;) {
      std::swap(t->left_, t->right_);
      Link& slot = t->right_;
      Permit child(slot->mu_, depth + 1, Mode::kExclusive);
      Probe::node_visited();
      if (!slot->left_) {
        T v = take_leaf_value(*slot);
        child.unlock();
        Link dropped = std::move(slot);
        return v;
      }
      Node* c = peel(slot, child, depth + 1);
      held = std::move(child);
      t = c;
      ++depth;
    }
  }

  // Phase 2 of remove_min: sifts t's value leafward, hand-over-hand.
  void push_down(Node* t, Permit held) {
    int depth = kRootDepth;
    while (t->left_) {
      Link* slot = nullptr;
      Permit child;
      if (!t->right_) {
        child = Permit(t->left_->mu_, depth + 1, Mode::kExclusive);
        Probe::node_visited();
        if (!less_(t->left_->value_, t->value_)) return;
        Node* w = peel(t->left_, child, depth + 1);
        std::swap(t->value_, w->value_);
        return;
      }

      T left_value = [&] {
        Permit p(t->left_->mu_, depth + 1, Mode::kShared);
        Probe::node_visited();
        return t->left_->value_;
      }();
      child = Permit(t->right_->mu_, depth + 1, Mode::kExclusive);
      Probe::node_visited();
      // Ties go right.
      if (less_(left_value, t->right_->value_)) {
        child.unlock();
        if (!less_(left_value, t->value_)) return;
        child = Permit(t->left_->mu_, depth + 1, Mode::kExclusive);
        slot = &t->left_;
      } else {
        if (!less_(t->right_->value_, t->value_)) return;
        slot = &t->right_;
      }
      Node* w = peel(*slot, child, depth + 1);
      std::swap(t->value_, w->value_);
      held = std::move(child);
      t = w;
      ++depth;
    }
  }

  mutable std::shared_mutex mu_;
  Link root_;
  std::size_t size_ = 0;
  [[no_unique_address]] Compare less_{};
};

// Values of a snapshot in preorder (node, left subtree, right subtree). Each
// node is read under its shared permit at visit time. Owns the snapshot and
// releases it on destruction.
template <class T, class Compare, class Probe>
class BraunHeap<T, Compare, Probe>::Stream {
 public:
  explicit Stream(BraunHeap snap) : snap_(std::move(snap)) {
    if (snap_.root_) pending_.emplace_back(snap_.root_, kRootDepth);
  }

  std::optional<T> next() {
    if (pending_.empty()) return std::nullopt;
    auto [node, depth] = std::move(pending_.back());
    pending_.pop_back();
    Permit p(node->mu_, depth, Mode::kShared);
    Probe::node_visited();
    if (node->right_) pending_.emplace_back(node->right_, depth + 1);
    if (node->left_) pending_.emplace_back(node->left_, depth + 1);
    return node->value_;
  }

  std::size_t snapshot_size() const noexcept { return snap_.size_; }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = T;
    using difference_type = std::ptrdiff_t;
    using pointer = const T*;
    using reference = const T&;

    iterator() = default;
    explicit iterator(Stream* s) : stream_(s) { ++*this; }

    reference operator*() const { return *current_; }
    pointer operator->() const { return &*current_; }
    iterator& operator++() {
      current_ = stream_->next();
      if (!current_) stream_ = nullptr;
      return *this;
    }
    void operator++(int) { ++*this; }
    bool operator==(const iterator& o) const { return stream_ == o.stream_; }

   private:
    Stream* stream_ = nullptr;
    std::optional<T> current_;
  };

  iterator begin() { return iterator(this); }
  iterator end() { return iterator(); }

 private:
  BraunHeap snap_;
  std::vector<std::pair<Link, int>> pending_;
};

}  // namespace braun
