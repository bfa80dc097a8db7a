#pragma once

// Test-only helpers. The immutable recursive Braun heap below is the
// independent oracle for exact tree shapes; HeapTestAccess reaches into
// BraunHeap so single phases can be exercised on hand-built trees.
//
// Notation: "." is an empty tree, "(v)" a leaf, "(v L R)" an interior node.
// "(v L)" is accepted as shorthand for "(v L .)".

#include <cctype>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "braun/concurrent_heap.hpp"
#include "braun/sequential_heap.hpp"
#include "braun/verification.hpp"

namespace braun::testing {

struct Shape {
  Value value = 0;
  std::unique_ptr<Shape> left;
  std::unique_ptr<Shape> right;
};

namespace detail_parse {

inline void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

inline std::unique_ptr<Shape> parse_at(std::string_view s, std::size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) throw std::invalid_argument("unexpected end of shape");
  if (s[i] == '.') {
    ++i;
    return nullptr;
  }
  if (s[i] != '(') throw std::invalid_argument("expected '(' in shape");
  ++i;
  skip_ws(s, i);
  std::size_t used = 0;
  auto node = std::make_unique<Shape>();
  node->value = std::stoll(std::string(s.substr(i)), &used);
  i += used;
  skip_ws(s, i);
  if (s[i] != ')') node->left = parse_at(s, i);
  skip_ws(s, i);
  if (s[i] != ')') node->right = parse_at(s, i);
  skip_ws(s, i);
  if (s[i] != ')') throw std::invalid_argument("expected ')' in shape");
  ++i;
  return node;
}

}  // namespace detail_parse

inline std::unique_ptr<Shape> parse_shape(std::string_view s) {
  std::size_t i = 0;
  return detail_parse::parse_at(s, i);
}

template <class N>
void render_into(const N* n, std::ostringstream& out) {
  if (!n) {
    out << '.';
    return;
  }
  const N* l = braun::detail::left_of(*n);
  const N* r = braun::detail::right_of(*n);
  out << '(' << braun::detail::value_of(*n);
  if (l || r) {
    out << ' ';
    render_into(l, out);
    out << ' ';
    render_into(r, out);
  }
  out << ')';
}

template <class N>
std::string render(const N* n) {
  std::ostringstream out;
  render_into(n, out);
  return out.str();
}

inline std::size_t shape_size(const Shape* s) {
  return s ? 1 + shape_size(s->left.get()) + shape_size(s->right.get()) : 0;
}

// ---------------------------------------------------------------------------
// Immutable recursive Braun heap, written directly from the recursive
// definitions (new tree returned by every operation). Shares no code with the
// library.

struct FNode {
  Value value;
  std::shared_ptr<const FNode> left;
  std::shared_ptr<const FNode> right;
};
using FTree = std::shared_ptr<const FNode>;

inline FTree f_node(Value v, FTree l = nullptr, FTree r = nullptr) {
  return std::make_shared<const FNode>(FNode{v, std::move(l), std::move(r)});
}

inline FTree f_insert(const FTree& t, Value v) {
  if (!t) return f_node(v);
  const Value lo = v < t->value ? v : t->value;
  const Value hi = v < t->value ? t->value : v;
  return f_node(lo, f_insert(t->right, hi), t->left);
}

// (value of the removed leaf unless the root itself was the leaf, new tree)
inline std::pair<std::optional<Value>, FTree> f_pull_up(const FTree& t, bool is_root) {
  if (!t->left) return {is_root ? std::nullopt : std::optional<Value>(t->value), nullptr};
  auto [v, rest] = f_pull_up(t->left, false);
  return {v, f_node(t->value, t->right, rest)};
}

inline FTree f_push_down(const FTree& t) {
  if (!t || !t->left) return t;
  const bool go_left = !t->right || t->left->value < t->right->value;
  const FTree& c = go_left ? t->left : t->right;
  if (!(c->value < t->value)) return t;
  FTree pushed = f_push_down(f_node(t->value, c->left, c->right));
  return go_left ? f_node(c->value, pushed, t->right) : f_node(c->value, t->left, pushed);
}

inline std::pair<std::optional<Value>, FTree> f_remove_min(const FTree& t) {
  if (!t) return {std::nullopt, nullptr};
  auto [replacement, rest] = f_pull_up(t, true);
  if (!replacement) return {t->value, nullptr};
  return {t->value, f_push_down(f_node(*replacement, rest->left, rest->right))};
}

// ---------------------------------------------------------------------------

template <class Compare>
void assign_shape(SequentialHeap<Value, Compare>& h, std::string_view s) {
  struct Build {
    static std::unique_ptr<typename SequentialHeap<Value, Compare>::Node> from(const Shape* sh) {
      if (!sh) return nullptr;
      auto n = std::make_unique<typename SequentialHeap<Value, Compare>::Node>(sh->value);
      n->left = from(sh->left.get());
      n->right = from(sh->right.get());
      return n;
    }
  };
  auto shape = parse_shape(s);
  h.mutable_root() = Build::from(shape.get());
  h.set_size_for_testing(shape_size(shape.get()));
}

}  // namespace braun::testing

namespace braun {

template <class T, class C, class P>
struct HeapTestAccess<BraunHeap<T, C, P>> {
  using Heap = BraunHeap<T, C, P>;
  using Node = typename Heap::Node;
  using Link = typename Heap::Link;
  using Permit = typename Heap::Permit;
  using Mode = typename Heap::Mode;

  static Link build(const testing::Shape* s) {
    if (!s) return nullptr;
    return std::make_shared<Node>(s->value, build(s->left.get()), build(s->right.get()));
  }

  static void assign(Heap& h, std::string_view shape) {
    auto s = testing::parse_shape(shape);
    h.release();
    h.root_ = build(s.get());
    h.size_ = testing::shape_size(s.get());
  }

  static Node* root(Heap& h) { return h.root_.get(); }

  static Node* left(Node* n) { return n->left_.get(); }
  static Node* right(Node* n) { return n->right_.get(); }
  static void set_snap_count(Node* n, std::uint32_t c) { n->snap_count_ = c; }

  // Phase 1 of remove_min on its own, as remove_min drives it.
  static std::optional<T> pull_up_left(Heap& h) {
    Permit heap(h.mu_, Heap::kHeapDepth, Mode::kExclusive);
    if (!h.root_) return std::nullopt;
    --h.size_;
    Permit root_permit(h.root_->mu_, Heap::kRootDepth, Mode::kExclusive);
    if (!h.root_->left_) {
      Heap::take_leaf_value(*h.root_);
      root_permit.unlock();
      Link dropped = std::move(h.root_);
      return std::nullopt;
    }
    Node* r = h.peel(h.root_, root_permit, Heap::kRootDepth);
    return h.pull_up_left(r);
  }

  static void push_down(Heap& h) {
    if (!h.root_) return;
    Permit p(h.root_->mu_, Heap::kRootDepth, Mode::kExclusive);
    h.push_down(h.root_.get(), std::move(p));
  }

  // Makes the root writable, copying it if it is shared.
  static Node* unsnap_root(Heap& h) {
    Permit heap(h.mu_, Heap::kHeapDepth, Mode::kExclusive);
    Permit p(h.root_->mu_, Heap::kRootDepth, Mode::kExclusive);
    return h.peel(h.root_, p, Heap::kRootDepth);
  }
};

}  // namespace braun
