#pragma once

// Seeded instance generation.  Samplers are hand-rolled on top of the fixed
// mt19937_64 stream so the generated instances are identical across
// platforms and standard library implementations.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "bicap/potential.hpp"
#include "bicap/tree.hpp"

namespace bicap {

using Rng = std::mt19937_64;

inline std::uint64_t uniform_u64(Rng& g, std::uint64_t n) {
  return std::uint64_t((unsigned __int128)(g()) * n >> 64);
}
inline double uniform01(Rng& g) { return double(g() >> 11) * 0x1.0p-53; }
inline double uniform(Rng& g, double a, double b) { return a + (b - a) * uniform01(g); }
inline int uniform_int(Rng& g, int lo, int hi) {  // inclusive
  return lo + int(uniform_u64(g, std::uint64_t(hi - lo + 1)));
}

inline Node1 random_node1(Rng& g, TreeShape s, int min_level = 0) {
  int l = uniform_int(g, min_level, s.depth);
  return {l, uniform_u64(g, std::uint64_t{1} << l)};
}
inline Node2 random_node2(Rng& g, TreeShape s, int min_level = 0) {
  return {random_node1(g, s, min_level), random_node1(g, s, min_level)};
}
inline Node1 random_leaf1(Rng& g, TreeShape s) {
  return {s.depth, uniform_u64(g, std::uint64_t{1} << s.depth)};
}
inline Node2 random_leaf_pair(Rng& g, TreeShape s) {
  return {random_leaf1(g, s), random_leaf1(g, s)};
}

inline std::vector<Node1> random_leaf_set1(Rng& g, TreeShape s, int count) {
  std::vector<Node1> v;
  for (int i = 0; i < count; ++i) v.push_back(random_leaf1(g, s));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline Measure2 random_boundary_measure(Rng& g, TreeShape s, int atoms, double lo = 0.25,
                                        double hi = 1.0) {
  Measure2 m(s);
  for (int i = 0; i < atoms; ++i) m.add(random_leaf_pair(g, s), uniform(g, lo, hi));
  return m;
}

inline Measure2 random_measure2(Rng& g, TreeShape s, int atoms, double lo = 0.25,
                                double hi = 1.0) {
  Measure2 m(s);
  for (int i = 0; i < atoms; ++i) m.add(random_node2(g, s), uniform(g, lo, hi));
  return m;
}

inline Function2 random_function2(Rng& g, TreeShape s, int support, double lo = 0.25,
                                  double hi = 1.0) {
  Function2 f(s);
  for (int i = 0; i < support; ++i) f.add(random_node2(g, s), uniform(g, lo, hi));
  return f;
}

inline std::vector<Node2> random_box_collection(Rng& g, TreeShape s, int count) {
  std::vector<Node2> v;
  for (int i = 0; i < count; ++i) v.push_back(random_node2(g, s));
  return antichain_maxima(v);
}

// ---------------------------------------------------------------------------
// Deep sparse paths: a small random trie so the points share non-trivial
// prefixes at depths far beyond any dense representation.

inline PathNode1 random_path(Rng& g, std::int64_t len) {
  PathNode1 p;
  p.len = len;
  std::int64_t nwords = (len + 63) / 64;
  p.words.resize(std::size_t(nwords));
  for (auto& w : p.words) w = g();
  if (len & 63) p.words.back() &= ~std::uint64_t{0} << (64 - (len & 63));
  return p;
}

inline PathNode1 branch_path(Rng& g, const PathNode1& base, std::int64_t cut, std::int64_t len) {
  if (cut > base.len || len < cut) throw std::invalid_argument("bad branch");
  PathNode1 p;
  p.len = len;
  std::int64_t nwords = (len + 63) / 64;
  p.words.resize(std::size_t(nwords));
  for (std::size_t i = 0; i < p.words.size(); ++i)
    p.words[i] = i < base.words.size() ? base.words[i] : g();
  // keep the first `cut` bits, randomize the rest
  std::int64_t w = cut >> 6;
  if (w < nwords) {
    std::uint64_t fresh = g();
    int keep = int(cut & 63);
    std::uint64_t mask = keep ? (~std::uint64_t{0} << (64 - keep)) : 0;
    p.words[std::size_t(w)] = (p.words[std::size_t(w)] & mask) | (fresh & ~mask);
    for (std::int64_t i = w + 1; i < nwords; ++i) p.words[std::size_t(i)] = g();
  }
  if (len & 63) p.words.back() &= ~std::uint64_t{0} << (64 - (len & 63));
  return p;
}

inline std::vector<PathNode1> random_deep_paths(Rng& g, int count, std::int64_t max_depth) {
  std::vector<PathNode1> out;
  out.push_back(random_path(g, 1 + std::int64_t(uniform_u64(g, std::uint64_t(max_depth)))));
  int guard = 0;
  while (int(out.size()) < count && ++guard < 20 * count) {
    const PathNode1& base = out[uniform_u64(g, out.size())];
    std::int64_t cut = std::int64_t(uniform_u64(g, std::uint64_t(base.len + 1)));
    std::int64_t len = cut + std::int64_t(uniform_u64(g, std::uint64_t(max_depth - cut + 1)));
    if (len == 0) len = 1;
    PathNode1 p = branch_path(g, base, cut, len);
    bool dup = false;
    for (const auto& q : out)
      if (q == p) { dup = true; break; }
    if (!dup) out.push_back(p);
  }
  return out;
}

inline std::vector<PathNode2> random_deep_points(Rng& g, int count, std::int64_t max_depth) {
  auto xs = random_deep_paths(g, count, max_depth);
  auto ys = random_deep_paths(g, count, max_depth);
  std::vector<PathNode2> out;
  for (int i = 0; i < count; ++i)
    out.push_back({xs[uniform_u64(g, xs.size())], ys[uniform_u64(g, ys.size())]});
  // drop duplicates
  std::vector<PathNode2> uniq;
  for (auto& p : out) {
    bool dup = false;
    for (const auto& q : uniq)
      if (q == p) { dup = true; break; }
    if (!dup) uniq.push_back(std::move(p));
  }
  return uniq;
}

// ---------------------------------------------------------------------------
// Random child-swapping automorphism of one coordinate tree.  The image of a
// vertex depends only on its root path, so meets and levels are preserved.

struct TreeAutomorphism {
  TreeShape shape;
  std::vector<std::uint8_t> swap_at;  // by heap index

  explicit TreeAutomorphism(TreeShape s)
      : shape(s), swap_at(std::size_t(s.nodes_per_tree()) + 1, 0) {}

  Node1 apply(Node1 n) const {
    std::uint64_t cur = 1, out = 0;
    for (int i = n.level - 1; i >= 0; --i) {
      unsigned bit = (n.pos >> i) & 1u;
      bit ^= swap_at[std::size_t(cur)];
      out = (out << 1) | bit;
      cur = 2 * cur + ((n.pos >> i) & 1u);
    }
    return {n.level, out};
  }
};

inline TreeAutomorphism random_automorphism(Rng& g, TreeShape s) {
  TreeAutomorphism a(s);
  for (auto& v : a.swap_at) v = std::uint8_t(uniform_u64(g, 2));
  return a;
}

inline Function2 apply_automorphism(const Function2& f, const TreeAutomorphism& ax,
                                    const TreeAutomorphism& ay) {
  Function2 out(f.shape);
  for (const auto& [n, v] : f.entries) out.add({ax.apply(n.x), ay.apply(n.y)}, v);
  return out;
}

}  // namespace bicap
