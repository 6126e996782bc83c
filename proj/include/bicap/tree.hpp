#pragma once

// Index arithmetic for truncated dyadic trees and their products.
//
// A tree of depth L has vertices (level, pos), 0 <= level <= L and
// 0 <= pos < 2^level; pos is the binary root path read MSB-first.  The
// level-L vertices double as the truncated boundary.  A bitree vertex is a
// pair of tree vertices ordered coordinatewise.  Everything here is a pure
// function of the indices; no tree is ever materialized.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bicap {

struct TreeShape {
  int depth;

  explicit TreeShape(int L) : depth(L) {
    if (L < 1 || L > 62) throw std::invalid_argument("tree depth must be in [1, 62]");
  }
  std::int64_t nodes_per_tree() const { return (std::int64_t{1} << (depth + 1)) - 1; }
  std::int64_t leaves_per_tree() const { return std::int64_t{1} << depth; }

  friend bool operator==(const TreeShape&, const TreeShape&) = default;
};

struct Node1 {
  int level = 0;
  std::uint64_t pos = 0;

  friend auto operator<=>(const Node1&, const Node1&) = default;
};

struct Node2 {
  Node1 x, y;

  friend auto operator<=>(const Node2&, const Node2&) = default;
};

inline constexpr Node1 kRoot1{0, 0};
inline constexpr Node2 kRoot2{{0, 0}, {0, 0}};

inline bool valid(Node1 a, TreeShape s) {
  return a.level >= 0 && a.level <= s.depth && a.pos < (std::uint64_t{1} << a.level);
}
inline bool valid(Node2 a, TreeShape s) { return valid(a.x, s) && valid(a.y, s); }

inline bool is_leaf(Node1 a, TreeShape s) { return a.level == s.depth; }
inline bool is_boundary_pair(Node2 a, TreeShape s) { return is_leaf(a.x, s) && is_leaf(a.y, s); }

// d_T(a) = number of ancestors of a, the node included.
inline int ancestor_count(Node1 a) { return a.level + 1; }
inline std::int64_t ancestor_count2(Node2 a) {
  return std::int64_t(ancestor_count(a.x)) * ancestor_count(a.y);
}

inline Node1 parent(Node1 a) {
  if (a.level == 0) throw std::invalid_argument("root has no parent");
  return {a.level - 1, a.pos >> 1};
}
inline Node1 parent_or_root(Node1 a) { return a.level == 0 ? a : parent(a); }
inline Node2 parent_or_root(Node2 a) { return {parent_or_root(a.x), parent_or_root(a.y)}; }

inline Node1 child(Node1 a, int which) { return {a.level + 1, (a.pos << 1) | unsigned(which)}; }

inline Node1 ancestor_at(Node1 a, int level) {
  if (level < 0 || level > a.level) throw std::invalid_argument("bad ancestor level");
  return {level, a.pos >> (a.level - level)};
}

// a <= b in the tree order: b lies on the root path of a.
inline bool le1(Node1 a, Node1 b) {
  return b.level <= a.level && (a.pos >> (a.level - b.level)) == b.pos;
}
inline bool le2(Node2 a, Node2 b) { return le1(a.x, b.x) && le1(a.y, b.y); }

// alpha in S(beta), equivalently beta in P(alpha).
inline bool in_successors(Node2 beta, Node2 alpha) { return le2(alpha, beta); }

inline Node1 meet1(Node1 a, Node1 b) {
  int l = std::min(a.level, b.level);
  std::uint64_t pa = a.pos >> (a.level - l);
  std::uint64_t pb = b.pos >> (b.level - l);
  int k = std::bit_width(pa ^ pb);
  return {l - k, pa >> k};
}
inline Node2 meet2(Node2 a, Node2 b) { return {meet1(a.x, b.x), meet1(a.y, b.y)}; }

inline int meet_count1(Node1 a, Node1 b) { return ancestor_count(meet1(a, b)); }
inline std::int64_t meet_count2(Node2 a, Node2 b) { return ancestor_count2(meet2(a, b)); }

inline std::vector<Node1> predecessors(Node1 a) {
  std::vector<Node1> out;
  out.reserve(a.level + 1);
  for (int l = 0; l <= a.level; ++l) out.push_back(ancestor_at(a, l));
  return out;
}

inline std::vector<Node2> predecessors(Node2 a) {
  std::vector<Node2> out;
  out.reserve(std::size_t(ancestor_count2(a)));
  for (int lx = 0; lx <= a.x.level; ++lx)
    for (int ly = 0; ly <= a.y.level; ++ly)
      out.push_back({ancestor_at(a.x, lx), ancestor_at(a.y, ly)});
  return out;
}

// Heap-style packing of one tree into [1, 2^{L+1}-1]; parent(h) = h/2.
inline std::uint64_t heap_index(Node1 a) { return (std::uint64_t{1} << a.level) + a.pos; }
inline Node1 node_at_heap(std::uint64_t h) {
  int l = std::bit_width(h) - 1;
  return {l, h - (std::uint64_t{1} << l)};
}

// The metric on the closed bitree.  Boundary vertices use the truncated
// ancestor count L+1, so the depth-L model recovers the infinite formula in
// the limit.
inline double metric_delta(Node2 z, Node2 w, TreeShape) {
  auto pw = [](int d) { return std::ldexp(1.0, -d); };
  Node1 mx = meet1(z.x, w.x), my = meet1(z.y, w.y);
  return pw(ancestor_count(mx)) + pw(ancestor_count(my)) -
         0.5 * (pw(ancestor_count(z.x)) + pw(ancestor_count(w.x)) + pw(ancestor_count(z.y)) +
                pw(ancestor_count(w.y)));
}

// ---------------------------------------------------------------------------
// Arc-extended ancestor sets.
//
// Vertices label circular dyadic arcs; J(a) at level l is
// [pos, pos+1) * 2^{-l} of the circle.  The extended predecessor set of a
// collects every vertex g whose tripled arc J(g-) u J(g) u J(g+) covers
// J(a); arc neighbours wrap circularly at each level.  This contains the
// plain ancestors, their same-level arc neighbours, and the two children
// of a.

inline std::vector<Node1> g_predecessors(Node1 a, TreeShape s) {
  std::vector<Node1> out;
  int top = std::min(a.level + 1, s.depth);
  for (int j = 0; j <= top; ++j) {
    std::uint64_t m = std::uint64_t{1} << j;
    if (j <= a.level) {
      std::uint64_t c = a.pos >> (a.level - j);
      out.push_back({j, c});
      if (m >= 2) {
        out.push_back({j, (c + 1) & (m - 1)});
        if (m >= 4) out.push_back({j, (c + m - 1) & (m - 1)});
      }
    } else {
      out.push_back({j, 2 * a.pos});
      out.push_back({j, 2 * a.pos + 1});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::int64_t g_ancestor_count(Node1 a, Node1 b, TreeShape s) {
  auto pa = g_predecessors(a, s);
  auto pb = g_predecessors(b, s);
  std::int64_t n = 0;
  auto i = pa.begin();
  auto j = pb.begin();
  while (i != pa.end() && j != pb.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else { ++n; ++i; ++j; }
  }
  return n;
}

inline std::int64_t g_ancestor_count2(Node2 a, Node2 b, TreeShape s) {
  return g_ancestor_count(a.x, b.x, s) * g_ancestor_count(a.y, b.y, s);
}

// ---------------------------------------------------------------------------
// Deep vertices for sparse instances whose depth exceeds the (level, pos)
// packing.  The root path is stored explicitly, MSB-first in 64-bit words.

struct PathNode1 {
  std::int64_t len = 0;  // level
  std::vector<std::uint64_t> words;

  bool bit(std::int64_t i) const { return (words[i >> 6] >> (63 - (i & 63))) & 1u; }
  void push_bit(bool b) {
    if ((len & 63) == 0) words.push_back(0);
    if (b) words[len >> 6] |= std::uint64_t{1} << (63 - (len & 63));
    ++len;
  }
  friend bool operator==(const PathNode1&, const PathNode1&) = default;
};

// d_T(a ^ b) = common prefix length + 1.
inline std::int64_t meet_depth(const PathNode1& a, const PathNode1& b) {
  std::int64_t n = std::min(a.len, b.len);
  std::int64_t full = n >> 6;
  for (std::int64_t w = 0; w < full; ++w) {
    std::uint64_t x = a.words[w] ^ b.words[w];
    if (x) return (w << 6) + std::countl_zero(x) + 1;
  }
  if (full < std::int64_t(a.words.size()) && full < std::int64_t(b.words.size())) {
    std::uint64_t x = a.words[full] ^ b.words[full];
    std::int64_t lcp = (full << 6) + (x ? std::countl_zero(x) : 64);
    return std::min(lcp, n) + 1;
  }
  return n + 1;
}

struct PathNode2 {
  PathNode1 x, y;
  friend bool operator==(const PathNode2&, const PathNode2&) = default;
};

inline double meet_count2(const PathNode2& a, const PathNode2& b) {
  return double(meet_depth(a.x, b.x)) * double(meet_depth(a.y, b.y));
}
inline double ancestor_count2(const PathNode2& a) {
  return double(a.x.len + 1) * double(a.y.len + 1);
}

// ---------------------------------------------------------------------------
// Sparse vertex sets.  A set is either the listed vertices themselves, the
// down-set they generate, or that down-set cut to the boundary pairs.

enum class SetKind { kExact, kDown, kBoundary };

struct NodeSet2 {
  SetKind kind = SetKind::kExact;
  std::vector<Node2> items;
};

inline std::vector<Node2> antichain_maxima(std::vector<Node2> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<Node2> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < v.size() && !dominated; ++j)
      if (i != j && le2(v[i], v[j])) dominated = true;
    if (!dominated) out.push_back(v[i]);
  }
  return out;
}

inline bool down_contains(const std::vector<Node2>& gens, Node2 a) {
  for (const auto& g : gens)
    if (le2(a, g)) return true;
  return false;
}

// All boundary pairs lying below one of the generators.
inline std::vector<Node2> boundary_leaves(const std::vector<Node2>& gens, TreeShape s,
                                          std::size_t max_size = (std::size_t{1} << 24)) {
  std::vector<Node2> out;
  for (const auto& g : gens) {
    int bits = (s.depth - g.x.level) + (s.depth - g.y.level);
    if (bits >= 40 || out.size() + (std::uint64_t{1} << bits) > max_size)
      throw std::length_error("boundary expansion exceeds size cap");
    std::uint64_t nx = std::uint64_t{1} << (s.depth - g.x.level);
    std::uint64_t ny = std::uint64_t{1} << (s.depth - g.y.level);
    for (std::uint64_t i = 0; i < nx; ++i)
      for (std::uint64_t j = 0; j < ny; ++j)
        out.push_back({{s.depth, (g.x.pos << (s.depth - g.x.level)) | i},
                       {s.depth, (g.y.pos << (s.depth - g.y.level)) | j}});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// S_b(E): boundary pairs below E, returned through its generator antichain.
inline NodeSet2 boundary_projection(const NodeSet2& e) {
  return {SetKind::kBoundary, antichain_maxima(e.items)};
}

}  // namespace bicap
