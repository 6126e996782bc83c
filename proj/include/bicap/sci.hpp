#pragma once

// Level-set machinery over the Hardy transform and the capacitary test
// harness built on it: dyadic level-set families with their boundary
// capacities, the summed capacitary ratio, the easy trace direction, the
// sampled subcapacitary constant, and the mixed-energy and diagonal
// domination reports.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bicap/capacity.hpp"
#include "bicap/instances.hpp"
#include "bicap/potential.hpp"
#include "bicap/tree.hpp"

namespace bicap {

struct LevelSetEntry {
  int k = 0;
  std::vector<Node2> generators;  // antichain of the level set of If
  double cap = 0;                 // capacity of its boundary projection
  bool certified = true;
};

struct LevelSetFamily {
  bool strict = false;
  bool stabilized = false;  // lowest entry equals every vertex reachable from supp f
  int k_min = 0, k_max = -1;
  std::vector<LevelSetEntry> entries;  // k descending
};

namespace detail {

// Maximal vertices with grid value above the threshold.  The Hardy
// transform only grows downward, so maximality is a two-parent test.
inline std::vector<Node2> threshold_antichain(const DenseField& a, double thr, bool strict) {
  std::vector<Node2> out;
  const int n1 = a.n1();
  auto over = [&](std::uint64_t hx, std::uint64_t hy) {
    double v = a.at(hx, hy);
    return strict ? v > thr : v >= thr;
  };
  for (std::uint64_t hx = 1; hx <= std::uint64_t(n1); ++hx)
    for (std::uint64_t hy = 1; hy <= std::uint64_t(n1); ++hy) {
      if (!over(hx, hy)) continue;
      if (hx > 1 && over(hx / 2, hy)) continue;
      if (hy > 1 && over(hx, hy / 2)) continue;
      out.push_back({node_at_heap(hx), node_at_heap(hy)});
    }
  return out;
}

}  // namespace detail

inline LevelSetFamily level_sets(const Function2& f, bool strict = false,
                                 bool with_capacity = true, double tol = 1e-8,
                                 int max_iters = 10000) {
  LevelSetFamily fam;
  fam.strict = strict;
  if (f.empty()) return fam;
  TreeShape s = f.shape;
  DenseField a = dense_hardy(f);

  double amax = 0;
  for (double v : a.raw()) amax = std::max(amax, v);
  int k = int(std::floor(std::log2(amax))) + 2;
  auto nonempty = [&](int kk) {
    double thr = std::exp2(double(kk));
    return strict ? amax > thr : amax >= thr;
  };
  while (!nonempty(k)) --k;
  fam.k_max = k;

  auto stable = detail::threshold_antichain(a, 0.0, true);  // reachable set maxima

  for (;; --k) {
    LevelSetEntry e;
    e.k = k;
    e.generators = detail::threshold_antichain(a, std::exp2(double(k)), strict);
    if (with_capacity) {
      if (!fam.entries.empty() && fam.entries.back().generators == e.generators) {
        e.cap = fam.entries.back().cap;  // unchanged set, keep the solve
        e.certified = fam.entries.back().certified;
      } else {
        auto r = capacity({s, NodeSet2{SetKind::kBoundary, e.generators}, tol, max_iters, false});
        e.cap = r.cap;
        e.certified = r.certified;
      }
    }
    bool is_stable = e.generators == stable;
    fam.entries.push_back(std::move(e));
    fam.k_min = k;
    if (is_stable) {
      fam.stabilized = true;
      break;
    }
    if (fam.k_max - k > 400) throw std::logic_error("level-set grid failed to stabilize");
  }
  return fam;
}

struct SciReport {
  double norm_sq = 0;
  double sum = 0;   // sum over all k of 4^k cap, tail included
  double tail = 0;  // closed-form geometric part below k_min
  double ratio = 0;
  bool certified = true;
  LevelSetFamily family;
};

inline SciReport sci_ratio(const Function2& f, bool strict = false, double tol = 1e-8,
                           int max_iters = 10000) {
  if (f.empty()) throw std::invalid_argument("function must not vanish");
  SciReport rep;
  for (const auto& [n, v] : f.entries) rep.norm_sq += v * v;
  rep.family = level_sets(f, strict, true, tol, max_iters);
  for (const auto& e : rep.family.entries) {
    rep.sum += std::exp2(2.0 * e.k) * e.cap;
    rep.certified = rep.certified && e.certified;
  }
  // below k_min the level set no longer changes; the remaining geometric
  // series sums to 4^{k_min}/3 times its capacity
  const auto& last = rep.family.entries.back();
  rep.tail = std::exp2(2.0 * rep.family.k_min) / 3.0 * last.cap;
  rep.sum += rep.tail;
  rep.ratio = rep.sum / rep.norm_sq;
  return rep;
}

// ---------------------------------------------------------------------------
// nu-mass of a realized vertex set.

inline double set_mass(const Measure2& nu, const NodeSet2& set) {
  double s = 0;
  for (const auto& [n, v] : nu.entries) {
    bool in = false;
    switch (set.kind) {
      case SetKind::kExact:
        in = std::find(set.items.begin(), set.items.end(), n) != set.items.end();
        break;
      case SetKind::kDown:
        in = down_contains(set.items, n);
        break;
      case SetKind::kBoundary:
        in = is_boundary_pair(n, nu.shape) && down_contains(set.items, n);
        break;
    }
    if (in) s += v;
  }
  return s;
}

// Exact easy direction: nu(union of boxes) <= ||I||^2 * cap(union).
struct TraceCheck {
  double set_mass = 0;
  double norm_sq = 0;
  double cap = 0;
  double bound = 0;
  bool ok = false;
};

inline TraceCheck trace_upper_bound_check(const Measure2& nu, const NodeSet2& e, TreeShape s,
                                          double tol = 1e-8) {
  TraceCheck c;
  c.set_mass = set_mass(nu, e);
  c.norm_sq = trace_norm_estimate(nu).norm_sq;
  c.cap = capacity({s, e, tol, 10000, false}).cap;
  c.bound = c.norm_sq * c.cap;
  c.ok = c.set_mass <= c.bound + 10 * tol * std::max(1.0, c.bound);
  return c;
}

// ---------------------------------------------------------------------------
// Sampled lower bounds for the subcapacitary constant
// sup nu(union S(a_j)) / cap(union S(a_j)).  The sup over all finite
// collections is out of reach; each strategy reports the best collection it
// saw, and every strategy subsumes the single-box scan.

enum class SubcapStrategy { kSingleBox, kRandomCollections, kLevelSetGuided };

struct SubcapResult {
  double constant = 0;
  std::vector<Node2> best_collection;
};

inline SubcapResult subcap_constant(const Measure2& nu, SubcapStrategy strategy, TreeShape s,
                                    std::uint64_t seed = 1, int samples = 50,
                                    const std::vector<Function2>* guides = nullptr,
                                    double tol = 1e-8) {
  SubcapResult best;
  auto consider = [&](const std::vector<Node2>& coll) {
    if (coll.empty()) return;
    NodeSet2 set{SetKind::kDown, coll};
    double mass = set_mass(nu, set);
    if (mass <= 0) return;
    double cap = capacity({s, set, tol, 10000, false}).cap;
    if (cap <= 0) return;
    double ratio = mass / cap;
    if (ratio > best.constant) {
      best.constant = ratio;
      best.best_collection = antichain_maxima(coll);
    }
  };

  // single boxes: every ancestor of an atom (the only boxes carrying mass)
  std::vector<Node2> candidates;
  for (const auto& [n, v] : nu.entries) {
    (void)v;
    for (const auto& p : predecessors(n)) candidates.push_back(p);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (const auto& a : candidates) {
    double ratio = successor_mass(nu, a) * double(ancestor_count2(a));
    if (ratio > best.constant) {
      best.constant = ratio;
      best.best_collection = {a};
    }
  }

  if (strategy == SubcapStrategy::kRandomCollections && !candidates.empty()) {
    Rng g(seed);
    for (int t = 0; t < samples; ++t) {
      int k = uniform_int(g, 2, 6);
      std::vector<Node2> coll;
      for (int i = 0; i < k; ++i) coll.push_back(candidates[uniform_u64(g, candidates.size())]);
      consider(antichain_maxima(coll));
    }
  } else if (strategy == SubcapStrategy::kLevelSetGuided && guides) {
    for (const auto& f : *guides) {
      auto fam = level_sets(f, false, false);
      for (const auto& e : fam.entries) consider(e.generators);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Mixed energy of two equilibrium measures against the capacitary bound.

struct MixedEnergyReport {
  double lhs = 0;  // integral of V^{mu_E} against mu_F
  double rhs = 0;  // cap(E)^{1/3} cap(F)^{2/3}
  double ratio = 0;
  double cap_e = 0, cap_f = 0;
  bool swapped = false;
  bool certified = true;
};

inline MixedEnergyReport mixed_energy_check(const NodeSet2& e_in, const NodeSet2& f_in,
                                            TreeShape s, double tol = 1e-8) {
  MixedEnergyReport rep;
  auto re = capacity({s, e_in, tol, 10000, false});
  auto rf = capacity({s, f_in, tol, 10000, false});
  rep.certified = re.certified && rf.certified;
  if (rf.cap > re.cap) {
    std::swap(re, rf);
    rep.swapped = true;
  }
  rep.cap_e = re.cap;
  rep.cap_f = rf.cap;
  if (rf.cap == 0) return rep;  // empty side: nothing to compare
  rep.lhs = mutual_energy(re.equilibrium, rf.equilibrium);
  rep.rhs = std::cbrt(re.cap) * std::cbrt(rf.cap) * std::cbrt(rf.cap);
  rep.ratio = rep.lhs / rep.rhs;
  return rep;
}

// ---------------------------------------------------------------------------
// Off-diagonal versus diagonal part of the weighted mixed-energy sum over a
// nested family.

struct DiagonalReport {
  double offdiag = 0;  // sum_k sum_{j<=k} 2^{j+k} E[mu_k, mu_j]
  double diag = 0;     // sum_k 2^{2k} cap
  double ratio = 0;
  bool certified = true;
};

inline DiagonalReport diagonal_domination_check(const std::vector<NodeSet2>& nested,
                                                const std::vector<int>& ks, TreeShape s,
                                                double tol = 1e-8) {
  if (nested.size() != ks.size()) throw std::invalid_argument("sets and weights differ in length");
  DiagonalReport rep;
  if (nested.empty()) return rep;
  for (std::size_t i = 0; i + 1 < nested.size(); ++i)
    for (const auto& g : nested[i + 1].items)
      if (!down_contains(nested[i].items, g))
        throw std::invalid_argument("family must be nested, later sets inside earlier ones");

  std::vector<Measure2> eq;
  std::vector<double> caps;
  for (const auto& set : nested) {
    auto r = capacity({s, set, tol, 10000, false});
    rep.certified = rep.certified && r.certified;
    eq.push_back(r.equilibrium);
    caps.push_back(r.cap);
  }
  for (std::size_t k = 0; k < eq.size(); ++k) {
    rep.diag += std::exp2(2.0 * ks[k]) * caps[k];
    for (std::size_t j = 0; j <= k; ++j)
      rep.offdiag += std::exp2(double(ks[k] + ks[j])) * mutual_energy(eq[k], eq[j]);
  }
  rep.ratio = rep.diag > 0 ? rep.offdiag / rep.diag : 0.0;
  return rep;
}

}  // namespace bicap
