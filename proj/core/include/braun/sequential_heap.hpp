#pragma once

// Single-threaded Braun heap. Used as the reference model for the concurrent
// heap and as a readable statement of the two shape rules:
//   * every insert or delete swaps the children of each node it visits;
//   * inserts continue into the new left child, deletes into the new right.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace braun {

template <class T, class Compare = std::less<T>>
class SequentialHeap {
 public:
  struct Node {
    explicit Node(T v) : value(std::move(v)) {}

    T value;
    std::unique_ptr<Node> left;
    std::unique_ptr<Node> right;
  };

  SequentialHeap() = default;
  explicit SequentialHeap(Compare less) : less_(std::move(less)) {}

  void insert(T v) {
    ++size_;
    std::unique_ptr<Node>* slot = &root_;
    while (*slot) {
      Node& t = **slot;
      if (less_(v, t.value)) std::swap(v, t.value);
      // v now holds the larger value; it goes into the old right subtree,
      // which becomes the new left.
      std::swap(t.left, t.right);
      slot = &t.left;
    }
    *slot = std::make_unique<Node>(std::move(v));
  }

  std::optional<T> get_min() const {
    if (!root_) return std::nullopt;
    return root_->value;
  }

  // Removes the leaf on the Braun deletion path and returns its value.
  // Returns nullopt (and empties the heap) when the root is that leaf.
  std::optional<T> pull_up_left() {
    if (!root_) return std::nullopt;
    --size_;
    if (!root_->left) {
      root_.reset();
      return std::nullopt;
    }
    std::unique_ptr<Node>* slot = &root_;
    for (;;) {
      Node& t = **slot;
      std::swap(t.left, t.right);
      slot = &t.right;
      if (!(*slot)->left) {
        T v = std::move((*slot)->value);
        slot->reset();
        return v;
      }
    }
  }

  // Sifts the root value down; both root subtrees must already be heaps.
  void push_down() {
    Node* t = root_.get();
    while (t && t->left) {
      Node* c = nullptr;
      if (!t->right) {
        c = t->left.get();
      } else {
        // Ties go right.
        c = less_(t->left->value, t->right->value) ? t->left.get() : t->right.get();
      }
      if (!less_(c->value, t->value)) return;
      std::swap(t->value, c->value);
      t = c;
    }
  }

  std::optional<T> remove_min() {
    if (!root_) return std::nullopt;
    T old = root_->value;
    if (auto replacement = pull_up_left()) {
      root_->value = std::move(*replacement);
      push_down();
    }
    return old;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return !root_; }

  const Node* root() const noexcept { return root_.get(); }
  const Compare& comparator() const noexcept { return less_; }

  // Test access: lets fixtures place arbitrary (possibly invalid) trees.
  std::unique_ptr<Node>& mutable_root() noexcept { return root_; }
  void set_size_for_testing(std::size_t n) noexcept { size_ = n; }

 private:
  std::unique_ptr<Node> root_;
  std::size_t size_ = 0;
  [[no_unique_address]] Compare less_{};
};

}  // namespace braun
