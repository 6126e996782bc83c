#pragma once

// Functions and measures on the truncated bitree, the Hardy operator and its
// adjoints, potentials, energies, and the embedding-norm estimator.
//
// Functions and measures share one sparse representation: non-negative
// values attached to vertices, absent vertices meaning zero.  Entries are
// kept in lexicographic (level_x, pos_x, level_y, pos_y) order so that every
// accumulation below is bit-reproducible.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "bicap/tree.hpp"

namespace bicap {

template <class N>
struct SparseMap {
  TreeShape shape;
  std::map<N, double> entries;

  explicit SparseMap(TreeShape s) : shape(s) {}

  void add(N node, double v) {
    if (!valid(node, shape)) throw std::invalid_argument("node outside tree shape");
    if (v < 0) throw std::invalid_argument("negative mass/value");
    if (v == 0) return;  // zero atoms are dropped on ingestion
    entries[node] += v;
  }
  double at(N node) const {
    auto it = entries.find(node);
    return it == entries.end() ? 0.0 : it->second;
  }
  double total() const {
    double t = 0;
    for (const auto& [n, v] : entries) t += v;
    return t;
  }
  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

using Function1 = SparseMap<Node1>;
using Function2 = SparseMap<Node2>;
using Measure1 = SparseMap<Node1>;
using Measure2 = SparseMap<Node2>;

// ---------------------------------------------------------------------------
// Point evaluations.

// If(z) = sum of f over the predecessor set of z.
inline double hardy(const Function2& f, Node2 z) {
  double s = 0;
  for (const auto& [n, v] : f.entries)
    if (le2(z, n)) s += v;
  return s;
}
inline double hardy(const Function1& f, Node1 z) {
  double s = 0;
  for (const auto& [n, v] : f.entries)
    if (le1(z, n)) s += v;
  return s;
}

// I*mu(b) = mu(S(b)), the mass at or below b.
inline double successor_mass(const Measure2& m, Node2 b) {
  double s = 0;
  for (const auto& [n, v] : m.entries)
    if (le2(n, b)) s += v;
  return s;
}
inline double successor_mass(const Measure1& m, Node1 b) {
  double s = 0;
  for (const auto& [n, v] : m.entries)
    if (le1(n, b)) s += v;
  return s;
}

// V(a) evaluated through the meets: sum over atoms of d(a ^ atom) * mass.
inline double potential(const Measure2& m, Node2 a) {
  double s = 0;
  for (const auto& [n, v] : m.entries) s += double(meet_count2(a, n)) * v;
  return s;
}
inline double potential(const Measure1& m, Node1 a) {
  double s = 0;
  for (const auto& [n, v] : m.entries) s += double(meet_count1(a, n)) * v;
  return s;
}

// Same quantity through the other route: ancestor sum of I*mu.  The two must
// agree up to rounding; tests pin that down.
inline double potential_via_ancestors(const Measure2& m, Node2 a) {
  double s = 0;
  for (const auto& b : predecessors(a)) s += successor_mass(m, b);
  return s;
}

// V_delta(a) = sum of I*mu over ancestors whose full potential is <= delta.
inline double restricted_potential(const Measure2& m, double delta, Node2 a) {
  if (delta <= 0) throw std::invalid_argument("delta must be positive");
  double s = 0;
  for (const auto& b : predecessors(a))
    if (potential(m, b) <= delta) s += successor_mass(m, b);
  return s;
}

// Mutual energy via the bilinear meet expansion; exact at any depth.
inline double mutual_energy(const Measure2& a, const Measure2& b) {
  double s = 0;
  for (const auto& [na, va] : a.entries)
    for (const auto& [nb, vb] : b.entries) s += double(meet_count2(na, nb)) * va * vb;
  return s;
}
inline double energy(const Measure2& a) { return mutual_energy(a, a); }

inline double mutual_energy(const Measure1& a, const Measure1& b) {
  double s = 0;
  for (const auto& [na, va] : a.entries)
    for (const auto& [nb, vb] : b.entries) s += double(meet_count1(na, nb)) * va * vb;
  return s;
}
inline double energy(const Measure1& a) { return mutual_energy(a, a); }

// nu-weighted adjoint: integral of phi over S(b) against nu.
inline double weighted_adjoint(const Function2& phi, const Measure2& nu, Node2 b) {
  double s = 0;
  for (const auto& [n, v] : nu.entries)
    if (le2(n, b)) s += phi.at(n) * v;
  return s;
}

// f(a) >= f(a+) + f(a-) at every interior vertex.
inline bool superharmonic_check(const Function1& f) {
  std::map<Node1, double> child_sum;
  for (const auto& [n, v] : f.entries)
    if (n.level > 0) child_sum[parent(n)] += v;
  for (const auto& [p, s] : child_sum) {
    double slack = 1e-12 * std::max(1.0, s);
    if (f.at(p) + slack < s) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Dense evaluation over every vertex of the bitree.  Rows/columns are the
// heap packings of the two coordinate trees; all sums are separable prefix
// or suffix passes along the heap order.

inline constexpr int kMaxDenseDepth = 10;

class DenseField {
 public:
  explicit DenseField(TreeShape s)
      : shape_(s), n1_(int(s.nodes_per_tree())), a_(std::size_t(n1_) * n1_, 0.0) {
    if (s.depth > kMaxDenseDepth) throw std::invalid_argument("depth too large for dense grid");
  }

  TreeShape shape() const { return shape_; }
  int n1() const { return n1_; }

  // 1-based heap indices.
  double& at(std::uint64_t hx, std::uint64_t hy) { return a_[(hx - 1) * n1_ + (hy - 1)]; }
  double at(std::uint64_t hx, std::uint64_t hy) const { return a_[(hx - 1) * n1_ + (hy - 1)]; }
  double& at(Node2 n) { return at(heap_index(n.x), heap_index(n.y)); }
  double at(Node2 n) const { return at(heap_index(n.x), heap_index(n.y)); }

  // In place: value at b becomes the sum over all vertices at or below b.
  void suffix_accumulate() {
    for (int hx = 1; hx <= n1_; ++hx)
      for (int hy = n1_; hy >= 1; --hy)
        if (2 * hy + 1 <= n1_) at(hx, hy) += at(hx, 2 * hy) + at(hx, 2 * hy + 1);
    for (int hx = n1_; hx >= 1; --hx)
      if (2 * hx + 1 <= n1_)
        for (int hy = 1; hy <= n1_; ++hy) at(hx, hy) += at(2 * hx, hy) + at(2 * hx + 1, hy);
  }

  // In place: value at z becomes the sum over all vertices at or above z.
  void prefix_accumulate() {
    for (int hx = 1; hx <= n1_; ++hx)
      for (int hy = 2; hy <= n1_; ++hy) at(hx, hy) += at(hx, hy / 2);
    for (int hx = 2; hx <= n1_; ++hx)
      for (int hy = 1; hy <= n1_; ++hy) at(hx, hy) += at(hx / 2, hy);
  }

  double sum_of_squares() const {
    double s = 0;
    for (double v : a_) s += v * v;
    return s;
  }

  const std::vector<double>& raw() const { return a_; }
  std::vector<double>& raw() { return a_; }

 private:
  TreeShape shape_;
  int n1_;
  std::vector<double> a_;
};

inline DenseField dense_of(const Measure2& m) {
  DenseField f(m.shape);
  for (const auto& [n, v] : m.entries) f.at(n) += v;
  return f;
}

inline DenseField dense_successor_mass(const Measure2& m) {
  DenseField f = dense_of(m);
  f.suffix_accumulate();
  return f;
}

inline DenseField dense_hardy(const Function2& f) {
  DenseField g = dense_of(f);
  g.prefix_accumulate();
  return g;
}

inline DenseField dense_potential(const Measure2& m) {
  DenseField f = dense_successor_mass(m);
  f.prefix_accumulate();
  return f;
}

// One-dimensional 1-based heap vectors with the same conventions.
inline std::vector<double> dense_of(const Measure1& m) {
  std::vector<double> v(std::size_t(m.shape.nodes_per_tree()) + 1, 0.0);
  for (const auto& [n, x] : m.entries) v[heap_index(n)] += x;
  return v;
}
inline void suffix_accumulate1(std::vector<double>& v) {
  int n = int(v.size()) - 1;
  for (int h = n; h >= 1; --h)
    if (2 * h + 1 <= n) v[h] += v[2 * h] + v[2 * h + 1];
}
inline void prefix_accumulate1(std::vector<double>& v) {
  int n = int(v.size()) - 1;
  for (int h = 2; h <= n; ++h) v[h] += v[h / 2];
}
inline std::vector<double> dense_potential1(const Measure1& m) {
  auto v = dense_of(m);
  suffix_accumulate1(v);
  prefix_accumulate1(v);
  return v;
}

// E^delta as an explicit vertex list (dense enumeration).
inline NodeSet2 potential_sublevel_set(const Measure2& m, double delta) {
  if (delta <= 0) throw std::invalid_argument("delta must be positive");
  DenseField v = dense_potential(m);
  NodeSet2 out{SetKind::kExact, {}};
  int n1 = v.n1();
  for (int hx = 1; hx <= n1; ++hx)
    for (int hy = 1; hy <= n1; ++hy)
      if (v.at(hx, hy) <= delta)
        out.items.push_back({node_at_heap(hx), node_at_heap(hy)});
  return out;
}

// ---------------------------------------------------------------------------
// Largest eigenvalue of the composition (weighted adjoint) o (Hardy), i.e.
// the squared norm of the embedding into L^2(nu).  Matrix-free power
// iteration over the ancestors of the atoms; the start vector is the
// normalized adjoint of nu, which already leans toward the top eigenvector.

struct TraceNormResult {
  double norm_sq = 0;
  int iterations = 0;
  bool converged = false;
};

inline TraceNormResult trace_norm_estimate(const Measure2& nu, double tol = 1e-9,
                                           int max_iters = 10000) {
  if (nu.empty()) throw std::invalid_argument("measure must not vanish");

  std::vector<Node2> atoms;
  std::vector<double> w;
  for (const auto& [n, v] : nu.entries) {
    atoms.push_back(n);
    w.push_back(v);
  }

  std::vector<Node2> nodes;
  for (const auto& a : atoms)
    for (const auto& p : predecessors(a)) nodes.push_back(p);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  auto index_of = [&](Node2 n) {
    return std::size_t(std::lower_bound(nodes.begin(), nodes.end(), n) - nodes.begin());
  };
  std::vector<std::vector<std::size_t>> pred_idx(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (const auto& p : predecessors(atoms[i])) pred_idx[i].push_back(index_of(p));

  auto apply = [&](const std::vector<double>& phi, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      double t = 0;
      for (auto j : pred_idx[i]) t += phi[j];
      t *= w[i];
      for (auto j : pred_idx[i]) out[j] += t;
    }
  };

  std::vector<double> phi(nodes.size(), 0.0), next(nodes.size(), 0.0);
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (auto j : pred_idx[i]) phi[j] += w[i];
  double n0 = 0;
  for (double v : phi) n0 += v * v;
  n0 = std::sqrt(n0);
  for (double& v : phi) v /= n0;

  TraceNormResult r;
  double prev = 0;
  for (int it = 1; it <= max_iters; ++it) {
    apply(phi, next);
    double num = 0, den = 0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
      num += phi[j] * next[j];
      den += phi[j] * phi[j];
    }
    double lam = num / den;
    double nn = 0;
    for (double v : next) nn += v * v;
    nn = std::sqrt(nn);
    if (nn == 0) { r.norm_sq = 0; r.iterations = it; r.converged = true; return r; }
    for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = next[j] / nn;
    r.iterations = it;
    r.norm_sq = lam;
    if (it > 1 && std::abs(lam - prev) <= tol * std::abs(lam)) {
      r.converged = true;
      return r;
    }
    prev = lam;
  }
  r.converged = false;  // caller sees the last Rayleigh quotient
  return r;
}

}  // namespace bicap
